import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers as instances
from tensorgkb.conditioning import (
    _kron_hermitian_quadratic,
    cond_lower_from_gram,
    cond_report,
    cond_upper_prop21,
    contractive_upper_bound,
    diagonalizable_cond_bounds,
    gram_extreme_bounds,
    hermitian_part_radius_bound,
    inv_norm_upper_and_cond,
    kron_rayleigh_product,
    matrix_cond,
    oracle_cond,
    spectral_summary,
    xu_lower_bound,
)
from tensorgkb.exceptions import HypothesisError, SingularityError
from tensorgkb.operators import materialize_stein

SLACK = 1e-10


def test_summary_fields():
    a = np.array([[3.0, 1.0], [-1.0, 2.0]])
    s = spectral_summary(a)
    sv = np.linalg.svd(a, compute_uv=False)
    assert (s.sigma_min, s.sigma_max) == pytest.approx((sv[-1], sv[0]))
    assert s.skew_norm == pytest.approx(1.0)
    assert s.herm_radius == pytest.approx(3.0)
    assert np.linalg.norm(s.y) == pytest.approx(1.0) and np.linalg.norm(s.z) == pytest.approx(1.0)
    assert np.linalg.norm(a @ a.T @ s.z - sv[-1] ** 2 * s.z) < 1e-12
    with pytest.raises(ValueError):
        spectral_summary(np.ones((2, 3)))


def test_summary_ties_pick_first_column():
    s = spectral_summary(np.eye(3))
    np.testing.assert_array_equal(np.abs(s.y), np.abs(s.z))


def test_scalar_examples():
    a = [np.array([[2.0]])]
    assert cond_upper_prop21(a) == pytest.approx(6.0)
    assert oracle_cond(a) == pytest.approx(1.0)
    g = gram_extreme_bounds(a)
    assert g.lower_on_lambda_max == pytest.approx(1.0)
    assert g.upper_on_lambda_min == pytest.approx(1.0)
    with pytest.raises(HypothesisError):
        cond_upper_prop21([np.array([[1.0]])])


def test_identity_coefficients_are_singular():
    eye = [np.eye(2), np.eye(3)]
    assert oracle_cond(eye) == math.inf
    with pytest.raises(SingularityError):
        xu_lower_bound([np.ones(2), np.ones(3)])
    assert "rayleigh" not in cond_lower_from_gram(eye)


def test_matrix_cond_flag():
    assert matrix_cond(np.diag([1.0, 1e-3])) == (pytest.approx(1e3), False)
    c, singular = matrix_cond(np.full((3, 3), 1 / 3))
    assert singular


@pytest.mark.parametrize("n_modes", [2, 3])
def test_bounds_against_oracle(n_modes):
    rng = np.random.default_rng(n_modes)
    for _ in range(20):
        c = instances.large_sigma_min(rng, n_modes)
        assert cond_upper_prop21(c) >= oracle_cond(c) * (1 - SLACK)
        c = instances.generic(rng, n_modes)
        true = oracle_cond(c)
        a = materialize_stein(c)
        lam = np.linalg.eigvalsh(a @ a.T)
        g = gram_extreme_bounds(c)
        assert g.lower_on_lambda_max <= lam[-1] * (1 + SLACK)
        assert g.upper_on_lambda_min >= lam[0] * (1 - SLACK) - 1e-14
        for v in cond_lower_from_gram(c).values():
            assert v <= true * (1 + SLACK)
        assert xu_lower_bound([np.linalg.eigvals(m) for m in c]) <= true * (1 + SLACK)
        c = instances.positive_definite_part(rng, n_modes)
        g = gram_extreme_bounds(c)
        assert g.positive_definite
        a = materialize_stein(c)
        assert g.upper_on_lambda_min_pd >= np.linalg.eigvalsh(a @ a.T)[0] * (1 - SLACK)
        for v in cond_lower_from_gram(c).values():
            assert v <= oracle_cond(c) * (1 + SLACK)
        c = instances.small_parts(rng, n_modes)
        inv, cb = inv_norm_upper_and_cond(c)
        assert inv >= 1 / np.linalg.svd(materialize_stein(c), compute_uv=False)[-1] * (1 - SLACK)
        assert cb >= oracle_cond(c) * (1 - SLACK)
        c = instances.contractive(rng, n_modes)
        true = oracle_cond(c)
        assert contractive_upper_bound(c) >= true * (1 - SLACK)
        bounds = diagonalizable_cond_bounds(c)
        assert "contractive" in bounds
        assert all(v >= true * (1 - SLACK) for v in bounds.values())
        c = instances.expanding_spectrum(rng, n_modes)
        bounds = diagonalizable_cond_bounds(c)
        assert "inverse_contractive" in bounds
        assert all(v >= oracle_cond(c) * (1 - SLACK) for v in bounds.values())


def test_pd_lower_bound_is_reached():
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(50):
        c = [np.diag(rng.uniform(1.5, 3.0, 2)), np.diag(rng.uniform(1.5, 3.0, 2))]
        low = cond_lower_from_gram(c)
        if "pd" in low:
            hits += 1
            assert low["pd"] <= low["rayleigh"] * (1 + SLACK)
            assert low["pd"] <= oracle_cond(c) * (1 + SLACK)
    assert hits > 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_kron_rayleigh_identity(count, seed):
    rng = np.random.default_rng(seed)
    dims = rng.integers(1, 5, count)
    xs = [rng.standard_normal(d) for d in dims]
    ms = [rng.standard_normal((d, d)) for d in dims]
    lhs = _kron_hermitian_quadratic(xs, ms)
    rhs = kron_rayleigh_product(xs, ms)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_kron_rayleigh_examples():
    a, b = np.array([[1.0, 4.0], [0.0, 2.0]]), np.array([[3.0, 1.0], [1.0, 5.0]])
    e = np.eye(2)
    assert kron_rayleigh_product([e[1], e[0]], [a, b]) == pytest.approx(2.0 * 3.0)
    skew = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert kron_rayleigh_product([np.array([0.3, 0.7]), np.ones(2)], [skew, b]) == 0.0
    with pytest.raises(ValueError):
        kron_rayleigh_product([e[0]], [a, b])


def test_binomial_sum_matches_power():
    rng = np.random.default_rng(7)
    for n_modes in (1, 2, 3, 5):
        power, binom = hermitian_part_radius_bound(instances.generic(rng, n_modes))
        assert binom == pytest.approx(power, rel=1e-12)


def test_radius_bound_holds():
    rng = np.random.default_rng(8)
    c = instances.generic(rng, 3)
    power, _ = hermitian_part_radius_bound(c)
    from tensorgkb.tensor import kron_chain
    k = kron_chain(list(reversed(c)))
    assert np.max(np.abs(np.linalg.eigvalsh(0.5 * (k + k.T)))) <= power * (1 + SLACK)


def test_hypothesis_errors():
    big = [2 * np.eye(2), np.eye(2)]
    with pytest.raises(HypothesisError):
        inv_norm_upper_and_cond(big)
    with pytest.raises(HypothesisError):
        contractive_upper_bound(big)
    defective = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(HypothesisError):
        diagonalizable_cond_bounds([defective])


def test_report_rows():
    rng = np.random.default_rng(9)
    rows = cond_report(instances.contractive(rng, 2))
    names = {r["bound"] for r in rows}
    assert {"oracle", "contractive_upper", "eigenvalue_ratio_lower", "min_singular_upper"} <= names
    row = next(r for r in rows if r["bound"] == "min_singular_upper")
    assert row["status"] == "n/a" and "sigma_min" in row["note"]
    rows = cond_report([np.full((3, 3), 1 / 3), np.eye(2) * 0.5])
    assert rows[0]["status"] == "singular"
    assert all(r["bound"] != "oracle" for r in cond_report([np.eye(2)] * 3, max_dim=4))
