"""Image quality metrics: RMSE and mean SSIM."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, ImageTooSmall
from .image import as_image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
DATA_RANGE = 255.0
C1 = (0.01 * DATA_RANGE) ** 2
C2 = (0.03 * DATA_RANGE) ** 2


def _pair(a, b):
    a, b = as_image(a), as_image(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"images have shapes {a.shape} and {b.shape}")
    return a, b


def rmse(a, b) -> float:
    """Root mean squared difference over all pixels.

    Differences are scaled by their largest magnitude before squaring so
    that tiny but nonzero differences do not underflow to an RMSE of 0.
    """
    a, b = _pair(a, b)
    d = np.abs(a - b)
    scale = d.max()
    if scale == 0.0:
        return 0.0
    return float(scale * np.sqrt(np.mean((d / scale) ** 2)))


def _gaussian_taps(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size) - size // 2
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _local_mean(img, taps, mass):
    out = ndimage.correlate1d(img, taps, axis=0, mode="constant", cval=0.0)
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant", cval=0.0)
    return out / mass


def ssim_map(a, b) -> np.ndarray:
    """Local SSIM index at every pixel.

    Statistics use an 11x11 Gaussian window (sigma 1.5). Near the border the
    window is cut at the image edge and renormalized by the mass it keeps,
    so no padded values enter the statistics.
    """
    a, b = _pair(a, b)
    if min(a.shape) < SSIM_WINDOW:
        raise ImageTooSmall(f"SSIM needs both sides >= {SSIM_WINDOW}, got {a.shape}")
    taps = _gaussian_taps()
    mass = _local_mean(np.ones_like(a), taps, 1.0)
    mu_a = _local_mean(a, taps, mass)
    mu_b = _local_mean(b, taps, mass)
    var_a = _local_mean(a * a, taps, mass) - mu_a * mu_a
    var_b = _local_mean(b * b, taps, mass) - mu_b * mu_b
    cov = _local_mean(a * b, taps, mass) - mu_a * mu_b
    num = (2 * mu_a * mu_b + C1) * (2 * cov + C2)
    den = (mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2)
    return num / den


def ssim(a, b) -> float:
    """Mean structural similarity over all pixel positions."""
    return float(np.mean(ssim_map(a, b)))


@dataclass(frozen=True)
class MetricReport:
    """Scores of one filter on one (image, noise level) cell."""

    image_id: str
    noise_level: float
    filter_id: str
    rmse: float
    ssim: float
    params_digest: str
    status: str = "ok"

    def __post_init__(self):
        if not self.params_digest:
            raise ValueError("params_digest must record the run parameters")
        if self.ok and not (self.rmse >= 0 and self.ssim <= 1 + 1e-12):
            raise ValueError(f"implausible metrics rmse={self.rmse} ssim={self.ssim}")

    @property
    def ok(self) -> bool:
        return self.status == "ok"
