"""Seeded additive white Gaussian noise.

Noise levels follow the "percent of the maximum gray level" convention: a
level of 0.10 means a standard deviation of 0.10 * 255 = 25.5 gray levels.

Samples come from numpy's ``PCG64`` bit generator feeding
``Generator.standard_normal`` (ziggurat), drawn in row-major pixel order.
That pairing is recorded as :data:`RNG_ALGORITHM` in every report.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .image import as_image

MAX_GRAY = 255.0
RNG_ALGORITHM = "numpy-PCG64/standard_normal-ziggurat"


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level as a fraction of the maximum gray level, plus a seed."""

    level: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.level <= 1.0):
            raise InvalidParameter(f"noise level must be in (0, 1], got {self.level}")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidParameter(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def sigma(self) -> float:
        return self.level * MAX_GRAY


def add_gaussian_noise(img, spec: NoiseSpec) -> np.ndarray:
    """Return ``img`` plus i.i.d. N(0, sigma^2) noise; the result is not clipped."""
    img = as_image(img)
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    return img + spec.sigma * rng.standard_normal(img.shape)


def derive_seed(base_seed: int, image_id: str, level: float) -> int:
    """Stable 64-bit seed for one (image, noise level) cell.

    BLAKE2b over ``"{base_seed}|{image_id}|{level:.6f}"``, so adding an image or
    a level never changes the noise of the existing cells.
    """
    key = f"{int(base_seed)}|{image_id}|{level:.6f}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def image_digest(img) -> str:
    """Short content hash used to prove filters saw the same noisy input."""
    arr = np.ascontiguousarray(as_image(img))
    head = f"{arr.shape[0]}x{arr.shape[1]}:".encode()
    return hashlib.blake2b(head + arr.tobytes(), digest_size=12).hexdigest()
