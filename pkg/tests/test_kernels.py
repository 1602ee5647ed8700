"""Kernel evaluation, domain checks, and the multi-index dictionary."""

import itertools
import math

import numpy as np
import pytest

from helpers import ALL_FAMILIES, in_domain_points, make_spec
from tksvr.errors import (
    CombinatorialOverflow,
    DimensionMismatch,
    DomainViolation,
    NonConvergent,
)
from tksvr.kernels import (
    KernelSpec,
    bergman_series,
    binomial_series,
    builtin_series_names,
    check_domain,
    compositions,
    dictionary_weight,
    eval_kernel,
    eval_normalized,
    eval_series,
    exponential_series,
    geometric_series,
    multi_index_dictionary,
    multinomial,
    polynomial_series,
    series_by_name,
)


# ---------------------------------------------------------------------------
# eval_kernel


def test_eval_kernel_exponential_at_zero():
    spec = make_spec("exponential", order=2, dim=1)
    assert eval_kernel(spec, [[0.0], [0.0]]) == 1.0


def test_eval_kernel_polynomial_matches_dictionary_enumeration():
    # K(1, 1) for (1+z)^2 must reproduce the explicit rho_nu x^nu expansion.
    spec = make_spec("polynomial", order=2, dim=1, s=2)
    expected = sum(rho * 1.0 ** (2 * nu[0])
                   for nu, rho in multi_index_dictionary(spec, 2))
    assert expected == 4.0
    assert eval_kernel(spec, [[1.0], [1.0]]) == pytest.approx(4.0, abs=1e-12)


def test_eval_kernel_geometric_product_matches_truncated_series():
    spec = make_spec("geometric", mode="product", order=2, dim=1)
    # Independent oracle: accumulate 0.25^k until the tail is < 1e-14.
    z, total, term, k = 0.25, 0.0, 1.0, 0
    while term > 1e-16:
        total += term
        k += 1
        term = z ** k
    assert total == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert eval_kernel(spec, [[0.5], [0.5]]) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_eval_kernel_rejects_out_of_domain_point():
    spec = make_spec("geometric", order=2, dim=2)
    with pytest.raises(DomainViolation):
        eval_kernel(spec, [[0.8, 0.8], [0.0, 0.0]])


def test_eval_kernel_shape_mismatch():
    spec = make_spec("exponential", order=2, dim=2)
    with pytest.raises(DimensionMismatch):
        eval_kernel(spec, [[0.0, 0.0]])


def test_permutation_symmetry_is_bit_exact():
    rng = np.random.default_rng(3)
    for family in ALL_FAMILIES:
        for mode in ("composed", "product"):
            spec = make_spec(family, mode=mode, order=4, dim=2)
            pts = in_domain_points(spec, rng, 4)
            base = eval_kernel(spec, pts)
            for perm in itertools.permutations(range(4)):
                assert eval_kernel(spec, pts[list(perm)]) == base


def test_diagonal_positivity():
    rng = np.random.default_rng(4)
    for family in ALL_FAMILIES:
        spec = make_spec(family, order=2, dim=2)
        for x in in_domain_points(spec, rng, 20):
            assert eval_kernel(spec, np.tile(x, (2, 1))) >= 0.0


def test_m2_exponential_composed_is_exp_of_inner_product():
    rng = np.random.default_rng(5)
    spec = make_spec("exponential", order=2, dim=3)
    for _ in range(20):
        x, xp = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
        assert eval_kernel(spec, np.vstack([x, xp])) == pytest.approx(
            math.exp(float(x @ xp)), rel=1e-14)


# ---------------------------------------------------------------------------
# series evaluation


def test_series_closed_form_agreement():
    rng = np.random.default_rng(6)
    for name in builtin_series_names():
        series = series_by_name(name, {"s": 3, "alpha": 1.5})
        if math.isfinite(series.radius):
            zs = rng.uniform(-0.9, 0.9, 100) * series.radius
        else:
            zs = rng.uniform(-3.0, 3.0, 100)
        for z in zs:
            assert eval_series(series, float(z)) == pytest.approx(
                series.psi(float(z)), rel=1e-10)


def test_series_outside_radius_is_nonconvergent():
    with pytest.raises(NonConvergent):
        eval_series(geometric_series(), 1.0)


def test_series_coefficients():
    assert exponential_series().gamma(4) == pytest.approx(1.0 / 24.0)
    assert polynomial_series(3).gamma(2) == 3.0
    assert polynomial_series(3).gamma(4) == 0.0
    assert binomial_series(1.0).gamma(5) == pytest.approx(1.0)
    assert bergman_series().gamma(2) == pytest.approx(3.0 / math.pi)
    with pytest.raises(ValueError):
        polynomial_series(-1)
    with pytest.raises(ValueError):
        binomial_series(0.0)
    with pytest.raises(ValueError):
        series_by_name("unknown")


# ---------------------------------------------------------------------------
# eval_normalized


def test_normalized_diagonal_is_one():
    rng = np.random.default_rng(7)
    for family in ALL_FAMILIES:
        spec = make_spec(family, order=2, dim=2)
        x = in_domain_points(spec, rng, 1)[0]
        assert eval_normalized(spec, np.tile(x, (2, 1))) == pytest.approx(
            1.0, rel=1e-12)


def test_normalized_exponential_closed_form():
    spec = make_spec("exponential", order=2, dim=1)
    value = eval_normalized(spec, [[1.0], [-1.0]])
    assert value == pytest.approx(math.exp(-2.0), rel=1e-13)


def test_normalized_bounded_by_one():
    rng = np.random.default_rng(8)
    for family in ALL_FAMILIES:
        for mode in ("composed", "product"):
            spec = make_spec(family, mode=mode, order=2, dim=2)
            for _ in range(50):
                pts = in_domain_points(spec, rng, 2)
                assert abs(eval_normalized(spec, pts)) <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# check_domain


def test_check_domain_infinite_radius_always_passes():
    spec = make_spec("exponential", order=2, dim=2)
    check = check_domain(spec, [100.0, -100.0])
    assert check.passed and check.margin == math.inf


def test_check_domain_composed_vs_product():
    composed = make_spec("geometric", order=2, dim=2)
    product = make_spec("geometric", mode="product", order=2, dim=2)
    point = [0.8, 0.8]
    assert not check_domain(composed, point).passed  # 0.64 + 0.64 >= 1
    assert check_domain(product, point).passed       # 0.8 < 1
    assert check_domain(product, point).margin == pytest.approx(0.2)


def test_check_domain_nonfinite_point_fails():
    spec = make_spec("geometric", order=2, dim=1)
    assert not check_domain(spec, [math.nan]).passed


def test_check_domain_boundary_margin():
    spec = make_spec("geometric", order=2, dim=1)
    assert not check_domain(spec, [np.sqrt(1.0 - 1e-12)]).passed
    assert check_domain(spec, [0.9]).passed


# ---------------------------------------------------------------------------
# multi_index_dictionary


def test_dictionary_polynomial_example():
    spec = make_spec("polynomial", order=2, dim=2, s=1)
    assert multi_index_dictionary(spec, 1) == [
        ((0, 0), 1.0), ((1, 0), 1.0), ((0, 1), 1.0)]


def test_dictionary_cutoff_zero():
    for family in ALL_FAMILIES:
        spec = make_spec(family, order=2, dim=3)
        entries = multi_index_dictionary(spec, 0)
        assert entries == [((0, 0, 0), spec.series.gamma(0))]


def test_dictionary_exponential_product_weights():
    spec = make_spec("exponential", mode="product", order=2, dim=1)
    weights = [rho for _, rho in multi_index_dictionary(spec, 3)]
    assert weights == pytest.approx([1.0, 1.0, 0.5, 1.0 / 6.0])


def test_dictionary_size_cap():
    spec = make_spec("exponential", order=2, dim=3)
    with pytest.raises(CombinatorialOverflow):
        multi_index_dictionary(spec, 10, size_cap=5)


def test_dictionary_weights_nonnegative_and_order_graded():
    rng = np.random.default_rng(9)
    for family in ALL_FAMILIES:
        for mode in ("composed", "product"):
            spec = make_spec(family, mode=mode, order=2, dim=2)
            entries = multi_index_dictionary(spec, 4)
            degrees = [sum(nu) for nu, _ in entries]
            assert degrees == sorted(degrees)
            assert all(rho >= 0.0 for _, rho in entries)


# ---------------------------------------------------------------------------
# combinatorics and spec validation


def test_compositions_count_and_sum():
    combos = list(compositions(4, 3))
    assert len(combos) == math.comb(6, 2)
    assert all(sum(c) == 4 for c in combos)
    assert len(set(combos)) == len(combos)


def test_multinomial_exact_and_loggamma_paths():
    assert multinomial(4, (2, 1, 1)) == 12.0
    assert multinomial(5, (5,)) == 1.0
    # Above the exact-integer cap the log-gamma path takes over.
    exact = math.factorial(30) // (math.factorial(15) ** 2)
    assert multinomial(30, (15, 15)) == pytest.approx(exact, rel=1e-12)
    with pytest.raises(ValueError):
        multinomial(3, (1, 1))


def test_dictionary_weight_modes():
    composed = make_spec("exponential", order=2, dim=2)
    product = make_spec("exponential", mode="product", order=2, dim=2)
    # Composed couples through the multinomial: gamma_2 * binom(2,1) = 1.
    assert dictionary_weight(composed, (1, 1)) == pytest.approx(1.0)
    # Product factorizes: gamma_1 * gamma_1 = 1.
    assert dictionary_weight(product, (1, 1)) == pytest.approx(1.0)


def test_kernel_spec_validation():
    series = exponential_series()
    with pytest.raises(ValueError):
        KernelSpec(series, "composed", 3, 1)  # odd order
    with pytest.raises(ValueError):
        KernelSpec(series, "composed", 0, 1)
    with pytest.raises(ValueError):
        KernelSpec(series, "tensor", 2, 1)  # bad mode
    with pytest.raises(ValueError):
        KernelSpec(series, "composed", 2, 0)  # bad dim
    spec = KernelSpec(series, "composed", 4, 1)
    assert spec.r == pytest.approx(4.0 / 3.0)
    assert spec.r_star == 4
