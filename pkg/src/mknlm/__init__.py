"""Non-local means denoising with an outlier-robust modified kernel."""

from .errors import (
    CenterOutOfBounds,
    CorruptFile,
    DegenerateDenominator,
    DenoiseError,
    DimensionMismatch,
    EvenSide,
    ImageTooSmall,
    InvalidImage,
    InvalidParameter,
    NonPositiveRho,
    SideMismatch,
    UnsupportedFormat,
)
from .image import Patch, as_image, extract_patch, patch_stack, residual, residual_display
from .io import load_image, save_image
from .metrics import MetricReport, rmse, ssim, ssim_map
from .mk import intra_patch_weights, mk_distance, mk_nlm_filter, mk_nlm_weights
from .nlm import (
    FULL_IMAGE,
    CenterWeight,
    FilterParams,
    gaussian_kernel,
    nlm_filter,
    nlm_weights,
    patch_distance,
)
from .noise import RNG_ALGORITHM, NoiseSpec, add_gaussian_noise

__version__ = "0.1.0"
