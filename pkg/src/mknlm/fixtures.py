"""Small synthetic test images that need no download."""

import numpy as np

DEFAULT_SIZE = 64


def gradient(size: int = DEFAULT_SIZE) -> np.ndarray:
    """Diagonal ramp from 30 to 220."""
    r = np.arange(size, dtype=np.float64)
    return 30.0 + 190.0 * (r[:, None] + r[None, :]) / max(1, 2 * (size - 1))


def checkerboard(size: int = DEFAULT_SIZE, square: int = 8) -> np.ndarray:
    """Alternating 60/190 squares of side ``square``."""
    r = np.arange(size) // square
    return np.where((r[:, None] + r[None, :]) % 2 == 0, 60.0, 190.0)


def piecewise_constant(size: int = DEFAULT_SIZE) -> np.ndarray:
    """A bright disk and a dark bar on a mid-gray background."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.full((size, size), 120.0)
    c = (size - 1) / 2.0
    img[(y - c) ** 2 + (x - c) ** 2 <= (size / 4.0) ** 2] = 210.0
    img[size // 8 : size // 8 + max(2, size // 10), size // 8 : size - size // 8] = 40.0
    return img


SYNTHETIC = {
    "gradient": gradient,
    "checkerboard": checkerboard,
    "piecewise": piecewise_constant,
}


def synthetic(name: str, size: int = DEFAULT_SIZE) -> np.ndarray:
    try:
        return SYNTHETIC[name](size)
    except KeyError:
        raise KeyError(f"unknown synthetic fixture {name!r}; choose from {sorted(SYNTHETIC)}") from None


def textured(shape=(16, 16)) -> np.ndarray:
    """Deterministic textured image with edges and a smooth part."""
    y, x = np.mgrid[0 : shape[0], 0 : shape[1]].astype(np.float64)
    img = 100.0 + 60.0 * np.sin(0.7 * x) * np.cos(0.45 * y) + 2.0 * x
    img[y > x] += 35.0
    return img
