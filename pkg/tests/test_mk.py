import math
from functools import partial

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mknlm import (
    FULL_IMAGE,
    CenterWeight,
    DegenerateDenominator,
    FilterParams,
    InvalidParameter,
    Patch,
    SideMismatch,
    gaussian_kernel,
    intra_patch_weights,
    mk_distance,
    mk_nlm_filter,
    mk_nlm_weights,
    nlm_filter,
    patch_distance,
)
from mknlm.fixtures import textured
from mknlm.mk import KERNEL, PRODUCT, VARIANTS, intra_weight_stack, mk_pair_distance
from mknlm.nlm import nonlocal_filter_reference

K3 = gaussian_kernel(3, 1.0)
intensity = st.floats(0, 255, allow_nan=False)
patches9 = arrays(np.float64, 9, elements=intensity)
images = arrays(np.float64, st.tuples(st.integers(2, 6), st.integers(2, 6)), elements=intensity)
variants = st.sampled_from(VARIANTS)

OUTLIER = [10, 10, 10, 10, 250, 10, 10, 10, 10]


def brute_force_weights(values):
    out = []
    for ai in values:
        out.append(1.0 / (1.0 + math.sqrt(sum((ai - aj) ** 2 for aj in values))))
    return out


def test_constant_patch_weights_are_one():
    np.testing.assert_array_equal(intra_patch_weights(np.full(9, 77.0)), np.ones(9))


def test_single_pixel_patch():
    assert intra_patch_weights([123.0]).tolist() == [1.0]


def test_outlier_fixture():
    w = intra_patch_weights(Patch.from_values(OUTLIER))
    assert w[4] == pytest.approx(1 / (1 + 240 * math.sqrt(8)), abs=1e-12)
    assert w[4] == pytest.approx(0.001471, abs=1e-6)
    others = np.delete(w, 4)
    np.testing.assert_allclose(others, 1 / 241, rtol=0, atol=1e-12)
    assert others[0] == pytest.approx(0.004149, abs=1e-6)


@given(patches9)
def test_matches_brute_force(values):
    np.testing.assert_allclose(intra_patch_weights(values), brute_force_weights(values), rtol=1e-12)


@settings(max_examples=200)
@given(patches9, st.floats(-1000, 1000))
def test_shift_invariance(values, c):
    np.testing.assert_allclose(intra_patch_weights(values + c), intra_patch_weights(values), rtol=1e-9, atol=0)


@settings(max_examples=200)
@given(patches9, st.permutations(range(9)))
def test_permutation_invariance(values, perm):
    perm = np.array(perm)
    np.testing.assert_allclose(intra_patch_weights(values[perm]), intra_patch_weights(values)[perm], rtol=1e-12)


@settings(max_examples=200)
@given(intensity, st.integers(0, 8), st.floats(0.01, 100), st.floats(0.01, 100))
def test_outlier_monotonicity(base, index, dev1, extra):
    values = np.full(9, base)
    values[index] = base + dev1
    w1 = intra_patch_weights(values)[index]
    values[index] = base + dev1 + extra
    w2 = intra_patch_weights(values)[index]
    assert w2 < w1


@given(patches9)
def test_weights_in_unit_interval(values):
    w = intra_patch_weights(values)
    assert np.all((w > 0) & (w <= 1))


def test_stacked_weights_bit_identical():
    img = textured((13, 17))
    from mknlm.image import extract_patch, patch_stack

    stack = intra_weight_stack(patch_stack(img, 3))
    for r in range(13):
        for c in range(17):
            assert stack[r, c].tobytes() == intra_patch_weights(extract_patch(img, (r, c), 3)).tobytes()


@pytest.mark.parametrize("variant", VARIANTS)
def test_identical_patches_zero(variant):
    p = np.array(OUTLIER, dtype=float)
    w = intra_patch_weights(p)
    assert mk_distance(p, p, w, w, K3, variant) == 0.0


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("a,b", [(0.0, 10.0), (40.0, 41.5), (200.0, 3.0)])
def test_constant_patches(variant, a, b):
    p, q = np.full(9, a), np.full(9, b)
    d = mk_distance(p, q, intra_patch_weights(p), intra_patch_weights(q), K3, variant)
    assert d == pytest.approx((a - b) ** 2 / 9, rel=1e-12)
    assert d == pytest.approx(patch_distance(p, q, K3) / 9, rel=1e-12)


def test_product_variant_formula():
    p = np.arange(9.0)
    q = np.arange(9.0)[::-1] * 2
    wp, wq = intra_patch_weights(p), intra_patch_weights(q)
    expected = sum(K3[k] * (wp[k] * p[k] - wq[k] * q[k]) ** 2 for k in range(9)) / sum(wp * wq)
    assert mk_distance(p, q, wp, wq, K3, PRODUCT) == pytest.approx(expected, rel=1e-12)


def test_kernel_variant_formula():
    p = np.arange(9.0)
    q = np.arange(9.0)[::-1] * 2
    wp, wq = intra_patch_weights(p), intra_patch_weights(q)
    expected = sum(K3[k] * wp[k] * wq[k] * (p[k] - q[k]) ** 2 for k in range(9)) / sum(wp * wq)
    assert mk_distance(p, q, wp, wq, K3, KERNEL) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("variant", VARIANTS)
def test_outlier_suppressed(variant):
    p = np.full(9, 10.0)
    q = p.copy()
    q[0] = 250.0
    d_mk = mk_distance(p, q, intra_patch_weights(p), intra_patch_weights(q), K3, variant)
    assert d_mk < patch_distance(p, q, K3)


def test_mk_distance_errors():
    w = np.ones(9)
    with pytest.raises(SideMismatch):
        mk_distance(np.zeros(9), np.zeros(9), w, np.ones(4), K3)
    with pytest.raises(DegenerateDenominator):
        mk_distance(np.zeros(9), np.zeros(9), np.zeros(9), w, K3)
    with pytest.raises(InvalidParameter):
        mk_distance(np.zeros(9), np.zeros(9), w, w, K3, "bogus")


@settings(max_examples=200)
@given(patches9, patches9, variants)
def test_symmetry_and_zero(p, q, variant):
    wp, wq = intra_patch_weights(p), intra_patch_weights(q)
    d = mk_distance(p, q, wp, wq, K3, variant)
    assert d >= 0
    assert d == pytest.approx(mk_distance(q, p, wq, wp, K3, variant), rel=1e-12, abs=1e-12)
    assert mk_distance(p, p, wp, wp, K3, variant) == 0.0


@pytest.mark.parametrize("variant", VARIANTS)
def test_constant_image_unchanged(variant):
    img = np.full((9, 9), 64.0)
    out = mk_nlm_filter(img, FilterParams(h=3.0, search_radius=2), variant)
    np.testing.assert_allclose(out, 64.0, rtol=0, atol=1e-9)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("policy", list(CenterWeight))
@pytest.mark.parametrize("radius", [1, 3, FULL_IMAGE])
def test_vectorized_matches_reference(variant, policy, radius):
    img = textured((9, 10))
    params = FilterParams(h=4.0, search_radius=radius, center_weight=policy)

    reference = nonlocal_filter_reference(img, params, partial(mk_pair_distance, variant=variant))
    np.testing.assert_allclose(mk_nlm_filter(img, params, variant), reference, rtol=0, atol=1e-12)


@pytest.mark.parametrize("variant", VARIANTS)
def test_windowed_equals_full_on_16x16(variant):
    img = textured((16, 16))
    full = nonlocal_filter_reference(
        img, FilterParams(h=4.0, search_radius=FULL_IMAGE), partial(mk_pair_distance, variant=variant)
    )
    np.testing.assert_allclose(mk_nlm_filter(img, FilterParams(h=4.0, search_radius=16), variant), full, rtol=0, atol=1e-12)


@pytest.mark.parametrize("variant", VARIANTS)
def test_side_one_reduces_to_nlm(variant):
    # one-pixel patches are internally constant: all intra weights are 1 and N = 1
    img = textured((12, 12))
    params = FilterParams(h=20.0, patch_side=1, search_radius=3)
    np.testing.assert_allclose(mk_nlm_filter(img, params, variant), nlm_filter(img, params), rtol=0, atol=1e-6)


@pytest.mark.parametrize("variant", VARIANTS)
def test_internally_constant_patches_rescale_by_patch_size(variant):
    # for constant patches d_mk = d_nlm / N, so h_mk = h / sqrt(N) gives identical NLM weights
    h, n = 30.0, 9
    levels = [20.0, 35.0, 90.0, 200.0]
    for a in levels:
        for b in levels:
            p, q = np.full(n, a), np.full(n, b)
            d_mk = mk_distance(p, q, intra_patch_weights(p), intra_patch_weights(q), K3, variant)
            assert math.exp(-d_mk / (h / math.sqrt(n)) ** 2) == pytest.approx(
                math.exp(-patch_distance(p, q, K3) / h**2), rel=1e-9
            )


@settings(max_examples=200, deadline=None)
@given(images, st.floats(0.5, 100.0), variants, st.sampled_from(list(CenterWeight)))
def test_weights_normalized(img, h, variant, policy):
    params = FilterParams(h=h, search_radius=2, center_weight=policy)
    _, w = mk_nlm_weights(img, (0, img.shape[1] - 1), params, variant)
    assert abs(w.sum() - 1.0) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(images, st.floats(0.5, 100.0), variants)
def test_output_within_input_range(img, h, variant):
    out = mk_nlm_filter(img, FilterParams(h=h, search_radius=2), variant)
    assert np.all(out >= img.min() - 1e-9) and np.all(out <= img.max() + 1e-9)


@settings(max_examples=200, deadline=None)
@given(images, st.floats(0.5, 100.0), variants)
def test_transpose_consistency(img, h, variant):
    params = FilterParams(h=h, search_radius=2)
    np.testing.assert_allclose(mk_nlm_filter(img.T, params, variant), mk_nlm_filter(img, params, variant).T, rtol=0, atol=1e-9)


def test_unknown_variant():
    with pytest.raises(InvalidParameter):
        mk_nlm_filter(np.zeros((4, 4)), FilterParams(h=1.0), "nope")
