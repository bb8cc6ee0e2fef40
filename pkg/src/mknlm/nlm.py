"""Classic non-local means with a Gaussian-weighted patch distance.

Each output pixel is a normalized weighted average of the pixels ``q`` in a
search window around ``p``::

    d(p, q) = sum_k G[k] * (P_p[k] - P_q[k])**2
    w(p, q) = exp(-d(p, q) / h**2) / Z(p)

where ``G`` is a normalized isotropic Gaussian over patch positions. The
distance is *not* divided by the patch size, so ``h`` is in gray-level units
and scales with the patch energy.

Two implementations live here. :func:`nlm_weights` and
:func:`nonlocal_filter_reference` visit one pixel at a time through
:func:`extract_patch` and serve as the naive oracle. :func:`nlm_filter` sweeps
the search offsets over the whole image at once; both visit candidates ``q``
in row-major order so their sums accumulate identically.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NonPositiveRho, SideMismatch, CenterOutOfBounds
from .image import Patch, as_image, check_side, extract_patch, patch_stack

FULL_IMAGE = "full"
DEFAULT_SEARCH_RADIUS = 10


class CenterWeight(str, enum.Enum):
    """How the self-comparison weight ``w(p, p)`` is set before normalizing."""

    #: ``q = p`` enters with ``d = 0``, i.e. weight ``exp(0) = 1``.
    LITERAL = "literal"
    #: ``w(p, p)`` is replaced by the largest weight among ``q != p``.
    MAX_OF_OTHERS = "max"


@dataclass(frozen=True)
class FilterParams:
    """Parameters shared by the NLM and MK-NLM filters.

    Parameters
    ----------
    h : float
        Smoothing parameter in gray levels; larger values smooth more.
    patch_side : int
        Odd side length of the comparison patches. Default 3.
    search_radius : int or ``FULL_IMAGE``
        Half-width of the square search window, clipped to the image.
        ``FULL_IMAGE`` compares every pixel with every other pixel.
    rho : float
        Standard deviation of the spatial Gaussian over patch positions.
    center_weight : CenterWeight
        Self-weight policy, see :class:`CenterWeight`.
    """

    h: float
    patch_side: int = 3
    search_radius: object = DEFAULT_SEARCH_RADIUS
    rho: float = 1.0
    center_weight: CenterWeight = field(default=CenterWeight.LITERAL)

    def __post_init__(self):
        check_side(self.patch_side)
        if not (self.h > 0 and np.isfinite(self.h)):
            raise InvalidParameter(f"h must be a positive finite number, got {self.h}")
        if not self.rho > 0:
            raise NonPositiveRho(f"rho must be positive, got {self.rho}")
        if self.search_radius != FULL_IMAGE:
            if int(self.search_radius) != self.search_radius or self.search_radius < 1:
                raise InvalidParameter(
                    f"search_radius must be an integer >= 1 or FULL_IMAGE, "
                    f"got {self.search_radius!r}"
                )
        object.__setattr__(self, "center_weight", CenterWeight(self.center_weight))

    def window_radii(self, shape) -> tuple:
        """Effective (row, col) search radii for an image of ``shape``."""
        h, w = shape
        if self.search_radius == FULL_IMAGE:
            return h - 1, w - 1
        return min(int(self.search_radius), h - 1), min(int(self.search_radius), w - 1)

    def describe(self) -> str:
        return (
            f"h={self.h:.6g};patch_side={self.patch_side};"
            f"search_radius={self.search_radius};rho={self.rho:.6g};"
            f"center_weight={self.center_weight.value}"
        )


def gaussian_kernel(side: int, rho: float = 1.0) -> np.ndarray:
    """Normalized isotropic Gaussian over a ``side`` x ``side`` patch, flattened.

    Entry ``(dr, dc)`` is proportional to ``exp(-(dr**2 + dc**2) / (2 rho**2))``
    and the entries sum to one.
    """
    side = check_side(side)
    if not rho > 0:
        raise NonPositiveRho(f"rho must be positive, got {rho}")
    r = side // 2
    offsets = np.arange(-r, r + 1, dtype=np.float64)
    sq = offsets[:, None] ** 2 + offsets[None, :] ** 2
    kernel = np.exp(-sq / (2.0 * rho * rho))
    return (kernel / kernel.sum()).ravel()


def _values(patch) -> np.ndarray:
    if isinstance(patch, Patch):
        return patch.values
    return np.asarray(patch, dtype=np.float64).ravel()


def patch_distance(p, q, kernel) -> float:
    """Kernel-weighted squared Euclidean distance between two patches."""
    a, b, kernel = _values(p), _values(q), np.asarray(kernel, dtype=np.float64)
    if not (a.shape == b.shape == kernel.shape):
        raise SideMismatch(
            f"patch sizes {a.size}, {b.size} and kernel size {kernel.size} differ"
        )
    return float(np.dot(kernel, (a - b) ** 2))


def window_coords(shape, center, params: FilterParams) -> np.ndarray:
    """Row-major list of pixel coordinates in the search window of ``center``."""
    row, col = center
    rr, rc = params.window_radii(shape)
    rows = np.arange(max(0, row - rr), min(shape[0], row + rr + 1))
    cols = np.arange(max(0, col - rc), min(shape[1], col + rc + 1))
    grid = np.stack(np.meshgrid(rows, cols, indexing="ij"), axis=-1)
    return grid.reshape(-1, 2)


def _normalized_weights(distances, self_index, params: FilterParams) -> np.ndarray:
    h2 = params.h * params.h
    if params.center_weight is CenterWeight.LITERAL:
        raw = np.exp(-distances / h2)
    else:
        others = np.delete(distances, self_index)
        # shift by the best competitor so the largest weight is exactly 1
        shift = others.min() if others.size else 0.0
        shifted = distances - shift
        shifted[self_index] = 0.0
        raw = np.exp(-shifted / h2)
        raw[self_index] = np.delete(raw, self_index).max() if others.size else 1.0
    return raw / raw.sum()


def pixel_weights(img, center, params: FilterParams, distance) -> tuple:
    """Per-pixel weights for an arbitrary patch distance.

    ``distance(center, q)`` must return the patch distance between pixel
    ``center`` and pixel ``q``. Returns ``(coords, weights)``.
    """
    img = as_image(img)
    row, col = center
    if not (0 <= row < img.shape[0] and 0 <= col < img.shape[1]):
        raise CenterOutOfBounds(f"pixel {center} outside image of shape {img.shape}")
    coords = window_coords(img.shape, center, params)
    d = np.array([distance(center, tuple(q)) for q in coords])
    self_index = int(np.flatnonzero((coords[:, 0] == row) & (coords[:, 1] == col))[0])
    return coords, _normalized_weights(d, self_index, params)


def nlm_pair_distance(img, params: FilterParams):
    """``distance(p, q)`` between the patches of two pixels of ``img``.

    Patches are extracted one pixel at a time and memoized per image.
    """
    img = as_image(img)
    kernel = gaussian_kernel(params.patch_side, params.rho)
    side = params.patch_side
    cache = {}

    def patch(pixel):
        if pixel not in cache:
            cache[pixel] = extract_patch(img, pixel, side)
        return cache[pixel]

    def distance(p, q):
        return patch_distance(patch(p), patch(q), kernel)

    return distance


def nlm_weights(img, center, params: FilterParams) -> tuple:
    """Normalized NLM weights of every pixel in the search window of ``center``.

    Returns
    -------
    coords : ndarray, shape (M, 2)
        Candidate pixels ``q`` in row-major order.
    weights : ndarray, shape (M,)
        ``w(center, q)``, summing to one.
    """
    return pixel_weights(img, center, params, nlm_pair_distance(img, params))


def nonlocal_filter_reference(img, params: FilterParams, pair_distance=nlm_pair_distance) -> np.ndarray:
    """Pixel-by-pixel filter; slow, for checking the vectorized path only.

    ``pair_distance(img, params)`` must return a ``distance(p, q)`` callable,
    e.g. :func:`nlm_pair_distance` or :func:`mknlm.mk.mk_pair_distance`.
    """
    img = as_image(img)
    distance = pair_distance(img, params)
    out = np.empty_like(img)
    for row in range(img.shape[0]):
        for col in range(img.shape[1]):
            coords, w = pixel_weights(img, (row, col), params, distance)
            out[row, col] = np.sum(w * img[coords[:, 0], coords[:, 1]])
    return out


def nonlocal_average(img, params: FilterParams, features, distance) -> np.ndarray:
    """Sweep every search offset over the image and average by patch similarity.

    Parameters
    ----------
    img : ndarray
        Image whose intensities are averaged.
    params : FilterParams
    features : tuple of ndarray
        Per-pixel arrays with leading shape ``img.shape``.
    distance : callable
        ``distance(features_at_p, features_at_q)`` over equally-sliced
        feature blocks, returning an array of patch distances.
    """
    height, width = img.shape
    rr, rc = params.window_radii(img.shape)
    h2 = params.h * params.h
    offsets = [(dy, dx) for dy in range(-rr, rr + 1) for dx in range(-rc, rc + 1)]

    def blocks(dy, dx):
        p = (slice(max(0, -dy), min(height, height - dy)), slice(max(0, -dx), min(width, width - dx)))
        q = (slice(p[0].start + dy, p[0].stop + dy), slice(p[1].start + dx, p[1].stop + dx))
        return p, q

    use_max = params.center_weight is CenterWeight.MAX_OF_OTHERS
    if use_max:
        shift = np.full(img.shape, np.inf)
        for dy, dx in offsets:
            if dy == 0 and dx == 0:
                continue
            p, q = blocks(dy, dx)
            d = distance(tuple(f[p] for f in features), tuple(f[q] for f in features))
            np.minimum(shift[p], d, out=shift[p])
        shift[np.isinf(shift)] = 0.0

    wsum = np.zeros(img.shape)
    vsum = np.zeros(img.shape)
    for dy, dx in offsets:
        p, q = blocks(dy, dx)
        if dy == 0 and dx == 0:
            w = np.ones(img.shape)
        else:
            d = distance(tuple(f[p] for f in features), tuple(f[q] for f in features))
            if use_max:
                d = d - shift[p]
            w = np.exp(-d / h2)
        wsum[p] += w
        vsum[p] += w * img[q]
    return vsum / wsum


def nlm_filter(img, params: FilterParams) -> np.ndarray:
    """Denoise ``img`` with classic non-local means."""
    img = as_image(img)
    kernel = gaussian_kernel(params.patch_side, params.rho)
    patches = patch_stack(img, params.patch_side)

    def distance(fp, fq):
        diff = fp[0] - fq[0]
        return (diff * diff) @ kernel

    return nonlocal_average(img, params, (patches,), distance)
