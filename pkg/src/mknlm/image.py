"""Grayscale image buffers, patch extraction and residuals.

Images are plain 2D ``float64`` numpy arrays indexed ``[row, col]`` with a
top-left origin. Intensities nominally live in [0, 255] but nothing here
clips them; quantization happens only when an image is written to disk.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CenterOutOfBounds, DimensionMismatch, EvenSide, InvalidImage

#: Offset added to a residual so that zero error renders as mid-gray.
RESIDUAL_OFFSET = 128.0


def as_image(data) -> np.ndarray:
    """Validate ``data`` and return it as a 2D float64 image.

    Raises
    ------
    InvalidImage
        If ``data`` is not 2D, has an empty axis, or holds NaN/Inf.
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidImage(f"expected a 2D grayscale image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidImage(f"image has an empty axis: shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise InvalidImage("image contains NaN or infinite intensities")
    return img


def check_side(side: int) -> int:
    if int(side) != side or side < 1 or side % 2 == 0:
        raise EvenSide(f"patch side must be a positive odd integer, got {side}")
    return int(side)


@dataclass(frozen=True)
class Patch:
    """A ``side`` x ``side`` neighborhood flattened in row-major order."""

    values: np.ndarray
    side: int
    center: tuple

    def __post_init__(self):
        check_side(self.side)
        if self.values.shape != (self.side * self.side,):
            raise ValueError(
                f"patch of side {self.side} needs {self.side ** 2} values, "
                f"got shape {self.values.shape}"
            )

    @classmethod
    def from_values(cls, values, center=(0, 0)) -> "Patch":
        """Build a patch from a flat or square sequence of intensities."""
        arr = np.asarray(values, dtype=np.float64).ravel()
        side = int(round(np.sqrt(arr.size)))
        if side * side != arr.size:
            raise EvenSide(f"{arr.size} values do not form a square patch")
        return cls(arr, check_side(side), tuple(center))


def reflect_index(i: int, n: int) -> int:
    """Mirror ``i`` into ``[0, n)`` about the edge pixels (edge not repeated)."""
    if n == 1:
        return 0
    period = 2 * (n - 1)
    i = abs(i) % period
    return period - i if i >= n else i


def extract_patch(img, center, side: int) -> Patch:
    """Return the ``side`` x ``side`` patch of ``img`` centered on ``center``.

    Coordinates falling outside the image are mirrored about the border
    pixel, so ``(-1, c)`` reads row 1 and ``(H, c)`` reads row ``H - 2``.

    Raises
    ------
    EvenSide
        If ``side`` is even or non-positive.
    CenterOutOfBounds
        If ``center`` is not a pixel of ``img``.
    """
    img = as_image(img)
    side = check_side(side)
    row, col = center
    h, w = img.shape
    if not (0 <= row < h and 0 <= col < w):
        raise CenterOutOfBounds(f"center {center} outside image of shape {img.shape}")
    r = side // 2
    rows = [reflect_index(row + d, h) for d in range(-r, r + 1)]
    cols = [reflect_index(col + d, w) for d in range(-r, r + 1)]
    values = img[np.ix_(rows, cols)].ravel()
    return Patch(values, side, (int(row), int(col)))


def pad_reflect(img: np.ndarray, radius: int) -> np.ndarray:
    """Mirror-pad ``img`` by ``radius`` pixels on every side.

    Handles radii larger than the image by repeated reflection, matching
    :func:`reflect_index`.
    """
    h, w = img.shape
    rows = [reflect_index(i, h) for i in range(-radius, h + radius)]
    cols = [reflect_index(j, w) for j in range(-radius, w + radius)]
    return img[np.ix_(rows, cols)]


def patch_stack(img, side: int) -> np.ndarray:
    """All patches of ``img`` at once, shape ``(H, W, side * side)``.

    ``patch_stack(img, s)[r, c]`` equals ``extract_patch(img, (r, c), s).values``.
    """
    img = as_image(img)
    side = check_side(side)
    padded = pad_reflect(img, side // 2)
    windows = np.lib.stride_tricks.sliding_window_view(padded, (side, side))
    return np.ascontiguousarray(windows.reshape(img.shape + (side * side,)))


def residual(filtered, reference) -> np.ndarray:
    """Signed per-pixel error ``filtered - reference``."""
    filtered = as_image(filtered)
    reference = as_image(reference)
    if filtered.shape != reference.shape:
        raise DimensionMismatch(
            f"residual of {filtered.shape} against {reference.shape}"
        )
    return filtered - reference


def residual_display(res) -> np.ndarray:
    """Shift a residual so zero error sits at mid-gray for viewing."""
    return as_image(res) + RESIDUAL_OFFSET
