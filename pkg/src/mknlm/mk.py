"""Modified-kernel non-local means (MK-NLM).

Every pixel of a patch gets a typicality weight from the Euclidean distance
between its intensity and all intensities of the same patch::

    u_i = 1 / (1 + sqrt(sum_j (a_i - a_j)**2))

so a pixel far from the rest of its patch (an outlier) gets a weight near
zero. Those weights then reshape the Gaussian kernel of the patch distance,
normalized by how much weight the pair shares. Two readings are provided:

``"kernel"`` (default)
    The pair's joint weight ``u_p[k] u_q[k]`` scales the kernel at each
    position, so outliers in either patch barely count::

        d(p, q) = sum_k G[k] u_p[k] u_q[k] (P_p[k] - P_q[k])**2
                  / sum_k u_p[k] u_q[k]

``"product"``
    Each patch is multiplied elementwise by its own weights before the
    comparison::

        d(p, q) = sum_k G[k] (u_p[k] P_p[k] - u_q[k] P_q[k])**2
                  / sum_k u_p[k] u_q[k]

    Because ``u`` is small (about 0.006 for a 3x3 patch at sigma 38) and
    varies from patch to patch, the weight fluctuations get multiplied by the
    raw intensity and swamp the structural difference. On the standard images
    this variant denoises worse than plain NLM, so it is kept for comparison
    only.

Both distances replace the plain Gaussian-weighted distance inside
``exp(-d / h**2)``; everything else matches :mod:`mknlm.nlm`. Both reduce to
``d_nlm / N`` when every patch is internally constant. The normalizer sums
over patch positions for the one pair (p, q), never over the search window.
The sum defining ``u_i`` runs over all ``j`` including ``i`` itself; that term
is zero.
"""

import numpy as np

from .errors import DegenerateDenominator, InvalidParameter, SideMismatch
from .image import as_image, extract_patch, patch_stack
from .nlm import FilterParams, _values, gaussian_kernel, nonlocal_average, pixel_weights

KERNEL = "kernel"
PRODUCT = "product"
VARIANTS = (KERNEL, PRODUCT)

# rows of patches processed together when building the weight cache
_CHUNK_ELEMENTS = 4_000_000


def intra_patch_weights(patch) -> np.ndarray:
    """Outlier-suppressing weight of each entry of a patch.

    Accepts a :class:`~mknlm.image.Patch`, a flat sequence, or any array
    whose last axis holds patch values; the weights have the same shape.
    """
    a = _values(patch) if not isinstance(patch, np.ndarray) or patch.ndim <= 1 else patch
    a = np.asarray(a, dtype=np.float64)
    diff = a[..., :, None] - a[..., None, :]
    spread = np.sqrt(np.einsum("...ij,...ij->...i", diff, diff))
    return 1.0 / (1.0 + spread)


def _check_variant(variant):
    if variant not in VARIANTS:
        raise InvalidParameter(f"unknown MK-NLM variant {variant!r}, expected one of {VARIANTS}")
    return variant


def mk_distance(p, q, wp, wq, kernel, variant: str = KERNEL) -> float:
    """Modified-kernel distance between two patches and their intra weights.

    Raises
    ------
    SideMismatch
        If the patches, weights and kernel differ in length.
    DegenerateDenominator
        If the weights share no mass (impossible for weights from
        :func:`intra_patch_weights`, which are strictly positive).
    """
    _check_variant(variant)
    a, b = _values(p), _values(q)
    wp, wq = np.asarray(wp, dtype=np.float64), np.asarray(wq, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if not (a.shape == b.shape == wp.shape == wq.shape == kernel.shape):
        raise SideMismatch("patches, intra weights and kernel must have the same size")
    shared = float(np.dot(wp, wq))
    if not shared > 0:
        raise DegenerateDenominator(f"weight normalizer is {shared}")
    if variant == KERNEL:
        return float(np.dot(kernel * wp * wq, (a - b) ** 2)) / shared
    return float(np.dot(kernel, (wp * a - wq * b) ** 2)) / shared


def intra_weight_stack(patches: np.ndarray) -> np.ndarray:
    """:func:`intra_patch_weights` for a ``(H, W, N)`` patch stack, in row chunks."""
    n = patches.shape[-1]
    rows = max(1, _CHUNK_ELEMENTS // max(1, patches.shape[1] * n * n))
    out = np.empty_like(patches)
    for start in range(0, patches.shape[0], rows):
        out[start : start + rows] = intra_patch_weights(patches[start : start + rows])
    return out


def mk_pair_distance(img, params: FilterParams, variant: str = KERNEL):
    """Pixel-pair MK distance over ``img`` with per-pixel memoized weights."""
    _check_variant(variant)
    img = as_image(img)
    kernel = gaussian_kernel(params.patch_side, params.rho)
    side = params.patch_side
    cache = {}

    def weighted(pixel):
        if pixel not in cache:
            patch = extract_patch(img, pixel, side)
            cache[pixel] = (patch, intra_patch_weights(patch))
        return cache[pixel]

    def distance(p, q):
        (pp, wp), (pq, wq) = weighted(p), weighted(q)
        return mk_distance(pp, pq, wp, wq, kernel, variant)

    return distance


def mk_nlm_weights(img, center, params: FilterParams, variant: str = KERNEL) -> tuple:
    """MK-NLM counterpart of :func:`mknlm.nlm.nlm_weights` (pixel-by-pixel)."""
    return pixel_weights(img, center, params, mk_pair_distance(img, params, variant))


def mk_nlm_filter(img, params: FilterParams, variant: str = KERNEL) -> np.ndarray:
    """Denoise ``img`` with modified-kernel non-local means.

    Intra-patch weights are computed once per pixel and reused for every
    pairing. ``params.h`` lives on a different scale than for
    :func:`~mknlm.nlm.nlm_filter` (the normalizer divides by roughly the patch
    size), so calibrate it separately.
    """
    _check_variant(variant)
    img = as_image(img)
    kernel = gaussian_kernel(params.patch_side, params.rho)
    patches = patch_stack(img, params.patch_side)
    weights = intra_weight_stack(patches)

    if variant == KERNEL:
        def distance(fp, fq):
            joint = fp[1] * fq[1]
            diff = fp[0] - fq[0]
            return ((joint * diff * diff) @ kernel) / joint.sum(axis=-1)

        return nonlocal_average(img, params, (patches, weights), distance)

    def distance(fp, fq):
        diff = fp[0] - fq[0]
        shared = np.einsum("...k,...k->...", fp[1], fq[1])
        return ((diff * diff) @ kernel) / shared

    return nonlocal_average(img, params, (weights * patches, weights), distance)
