"""Condition-number bounds for the Stein matrix ``I - A_N (x) ... (x) A_1``.

All bounds are computed from per-coefficient spectral data (a few small SVDs
and eigendecompositions), never from the Kronecker product itself. The exact
value is available through :func:`oracle_cond` when the product is small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import HypothesisError, SingularityError
from .operators import DEFAULT_MAX_DIM, materialize_stein
from .tensor import kron_chain

__all__ = [
    "SpectralSummary",
    "spectral_summary",
    "matrix_cond",
    "cond_upper_prop21",
    "GramBounds",
    "gram_extreme_bounds",
    "cond_lower_from_gram",
    "kron_rayleigh_product",
    "hermitian_part",
    "skew_part",
    "hermitian_part_radius_bound",
    "inv_norm_upper_and_cond",
    "diagonalizable_cond_bounds",
    "xu_lower_bound",
    "contractive_upper_bound",
    "oracle_cond",
    "cond_report",
]

RANK_TOL = 1e-14


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def skew_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a - a.T)


@dataclass(frozen=True)
class SpectralSummary:
    """Spectral quantities of one coefficient matrix ``A``.

    ``y`` and ``z`` are unit left singular vectors for ``sigma_max`` and
    ``sigma_min`` (``A A^T y = sigma_max^2 y``); ``skew_norm`` is
    ``||S(A)||_2`` and ``herm_radius`` the spectral radius of ``H(A)``.
    """

    matrix: np.ndarray
    sigma_min: float
    sigma_max: float
    skew_norm: float
    herm_radius: float
    herm_lambda_min: float
    herm_lambda_max: float
    y: np.ndarray
    z: np.ndarray
    eigenvalues: np.ndarray


def spectral_summary(a) -> SpectralSummary:
    a = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    u, s, _ = np.linalg.svd(a)
    # svd returns singular values in descending order; ties resolve to the first column
    i_min = int(np.flatnonzero(s == s[-1])[0])
    h = np.linalg.eigvalsh(hermitian_part(a))
    return SpectralSummary(
        matrix=a,
        sigma_min=float(s[-1]),
        sigma_max=float(s[0]),
        skew_norm=float(np.linalg.norm(skew_part(a), 2)),
        herm_radius=float(np.max(np.abs(h))),
        herm_lambda_min=float(h[0]),
        herm_lambda_max=float(h[-1]),
        y=u[:, 0].copy(),
        z=u[:, i_min].copy(),
        eigenvalues=np.linalg.eigvals(a),
    )


def _summaries(items) -> list[SpectralSummary]:
    return [s if isinstance(s, SpectralSummary) else spectral_summary(s) for s in items]


def matrix_cond(a) -> tuple[float, bool]:
    """2-norm condition number and a flag set when ``sigma_min < 1e-14 sigma_max``."""
    a = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=np.float64)
    s = np.linalg.svd(a, compute_uv=False)
    singular = bool(s[-1] < RANK_TOL * s[0])
    cond = math.inf if s[-1] == 0 else float(s[0] / s[-1])
    return cond, singular


def cond_upper_prop21(summaries: Sequence) -> float:
    """Upper bound valid when ``prod sigma_min > 1``::

        cond <= p / (p - 1) * (1 + prod ||A_i||_2),   p = prod sigma_min
    """
    ss = _summaries(summaries)
    p = math.prod(s.sigma_min for s in ss)
    if not p > 1:
        raise HypothesisError(f"prod sigma_min = {p:.6g} is not > 1")
    return p / (p - 1) * (1 + math.prod(s.sigma_max for s in ss))


def kron_rayleigh_product(vectors: Sequence[np.ndarray], matrices: Sequence[np.ndarray]) -> float:
    """``prod_i x_i^T H(A_i) x_i``.

    Equals the Rayleigh quotient of ``H(A_1 (x) ... (x) A_l)`` at
    ``x_1 (x) ... (x) x_l``.
    """
    if len(vectors) != len(matrices):
        raise ValueError("need one vector per matrix")
    out = 1.0
    for x, a in zip(vectors, matrices):
        x = np.asarray(x, dtype=np.float64)
        out *= float(x @ hermitian_part(np.asarray(a, dtype=np.float64)) @ x)
    return out


@dataclass(frozen=True)
class GramBounds:
    lower_on_lambda_max: float
    upper_on_lambda_min: float
    upper_on_lambda_min_pd: float | None
    positive_definite: bool


def gram_extreme_bounds(summaries: Sequence) -> GramBounds:
    """Bounds on the extreme eigenvalues of ``AA^T`` for the Stein matrix ``A``::

        lambda_max >= 1 + prod sigma_max^2 - 2 prod y_i^T H(A_i) y_i
        lambda_min <= 1 + prod sigma_min^2 - 2 prod z_i^T H(A_i) z_i

    When every ``H(A_i)`` is positive definite the second bound relaxes to
    ``1 + prod sigma_min^2`` (reported in ``upper_on_lambda_min_pd``).
    """
    ss = _summaries(summaries)
    mats = [s.matrix for s in ss]
    lo = 1 + math.prod(s.sigma_max**2 for s in ss) - 2 * kron_rayleigh_product([s.y for s in ss], mats)
    hi = 1 + math.prod(s.sigma_min**2 for s in ss) - 2 * kron_rayleigh_product([s.z for s in ss], mats)
    pd = all(s.herm_lambda_min > 0 for s in ss)
    hi_pd = 1 + math.prod(s.sigma_min**2 for s in ss) if pd else None
    return GramBounds(lo, hi, hi_pd, pd)


def cond_lower_from_gram(summaries: Sequence) -> dict:
    """Condition-number lower bounds implied by :func:`gram_extreme_bounds`.

    ``"rayleigh"`` is ``sqrt(lower_on_lambda_max / upper_on_lambda_min)``. With
    positive definite symmetric parts and
    ``prod sigma_max^2 >= 2 prod lambda_max(H(A_i))`` the key ``"pd"`` holds
    ``sqrt(1 + prod sigma_max^2 - 2 prod lambda_max(H_i)) / sqrt(1 + prod sigma_min^2)``.
    """
    ss = _summaries(summaries)
    g = gram_extreme_bounds(ss)
    out = {}
    if g.lower_on_lambda_max > 0 and g.upper_on_lambda_min > 0:
        out["rayleigh"] = math.sqrt(g.lower_on_lambda_max / g.upper_on_lambda_min)
    if g.positive_definite:
        smax2 = math.prod(s.sigma_max**2 for s in ss)
        hmax = math.prod(s.herm_lambda_max for s in ss)
        if smax2 >= 2 * hmax:
            out["pd"] = math.sqrt(1 + smax2 - 2 * hmax) / math.sqrt(g.upper_on_lambda_min_pd)
    return out


def hermitian_part_radius_bound(summaries: Sequence, n: int | None = None) -> tuple[float, float]:
    """Bound on ``|lambda(H(A_N (x) ... (x) A_1))|``.

    Returns ``((M_S + M_H)^N, sum_r C(N, r) M_S^r M_H^(N-r))``; the two agree by
    the binomial theorem. ``M_S`` is the largest ``||S(A_i)||_2`` and ``M_H``
    the largest spectral radius of ``H(A_i)``.
    """
    ss = _summaries(summaries)
    n = len(ss) if n is None else int(n)
    ms = max(s.skew_norm for s in ss)
    mh = max(s.herm_radius for s in ss)
    binom = sum(math.comb(n, r) * ms**r * mh ** (n - r) for r in range(n + 1))
    return (ms + mh) ** n, binom


def inv_norm_upper_and_cond(summaries: Sequence) -> tuple[float, float]:
    """Bounds on ``||A^{-1}||_2`` and ``cond(A)`` when ``M_S + M_H < 1``.

    With ``m = (M_S + M_H)^N`` and ``p = prod sigma_min^2`` one has
    ``lambda_min(AA^T) >= 1 + p - 2 m``, so::

        ||A^{-1}||_2 <= (1 + p - 2 m)^(-1/2)
        cond(A)      <= (1 + prod sigma_max) (1 + p - 2 m)^(-1/2)

    When ``m <= 1/2`` the first bound is at most ``1 / prod sigma_min``.

    Raises
    ------
    HypothesisError
        ``M_S + M_H >= 1`` or ``1 + p - 2 m <= 0``.
    """
    ss = _summaries(summaries)
    ms = max(s.skew_norm for s in ss)
    mh = max(s.herm_radius for s in ss)
    if not ms + mh < 1:
        raise HypothesisError(f"M_S + M_H = {ms + mh:.6g} is not < 1")
    m = (ms + mh) ** len(ss)
    gap = 1 + math.prod(s.sigma_min**2 for s in ss) - 2 * m
    if not gap > 0:
        raise HypothesisError(f"1 + prod sigma_min^2 - 2 (M_S + M_H)^N = {gap:.6g} is not > 0")
    inv = 1 / math.sqrt(gap)
    return inv, (1 + math.prod(s.sigma_max for s in ss)) * inv


def _eigen_products(eigenvalue_sets: Sequence[np.ndarray]) -> np.ndarray:
    prods = np.ones(1, dtype=complex)
    for lam in eigenvalue_sets:
        prods = np.multiply.outer(prods, np.asarray(lam, dtype=complex)).ravel()
    return prods


def diagonalizable_cond_bounds(
    matrices: Sequence,
    eigendecomps: Sequence[tuple[np.ndarray, np.ndarray]] | None = None,
    *,
    guard: float = 1e12,
) -> dict:
    """Upper bounds from ``A_i = S_i D_i S_i^{-1}``.

    Returns a dict whose keys name the hypothesis that held:

    ``"general"``
        ``prod cond(S_i) (1 + prod sigma_max) M_D`` with
        ``M_D = 1 / min |1 - prod lambda|`` (needs 1 outside the spectrum of
        the Kronecker product).
    ``"inverse_contractive"``
        ``prod ||D_i^{-1}||_2 < 1``: ``... / (1 - prod ||D_i^{-1}||_2)``.
    ``"contractive"``
        ``prod ||D_i||_2 < 1``: ``... / (1 - prod ||D_i||_2)``.

    Raises
    ------
    HypothesisError
        Some eigenvector matrix has condition number above `guard`.
    """
    mats = [m.toarray() if sp.issparse(m) else np.asarray(m, dtype=np.float64) for m in matrices]
    if eigendecomps is None:
        eigendecomps = [np.linalg.eig(a) for a in mats]
    lams = [np.asarray(lam) for lam, _ in eigendecomps]
    cond_s = 1.0
    for i, (_, s) in enumerate(eigendecomps):
        c = np.linalg.cond(s)
        if not c < guard:
            raise HypothesisError(f"coefficient {i} is not numerically diagonalizable (cond(S)={c:.3g})")
        cond_s *= float(c)
    front = cond_s * (1 + math.prod(float(np.linalg.norm(a, 2)) for a in mats))
    out = {}
    dist = float(np.min(np.abs(1 - _eigen_products(lams))))
    if dist > 0:
        out["general"] = front / dist
    d_inv = math.prod(float(np.max(1 / np.abs(lam))) if np.all(lam != 0) else math.inf for lam in lams)
    if d_inv < 1:
        out["inverse_contractive"] = front / (1 - d_inv)
    d_norm = math.prod(float(np.max(np.abs(lam))) for lam in lams)
    if d_norm < 1:
        out["contractive"] = front / (1 - d_norm)
    return out


def xu_lower_bound(eigenvalue_sets: Sequence[np.ndarray]) -> float:
    """``max |1 - prod lambda| / min |1 - prod lambda|`` over all eigenvalue choices.

    Raises
    ------
    SingularityError
        Some ``prod lambda == 1``: the Stein matrix is singular.
    """
    d = np.abs(1 - _eigen_products(eigenvalue_sets))
    if d.min() == 0:
        raise SingularityError("1 - prod lambda vanishes: the Stein matrix is singular")
    return float(d.max() / d.min())


def contractive_upper_bound(summaries: Sequence) -> float:
    """``(1 + prod ||A_i||) / (1 - prod ||A_i||)``, valid when ``prod ||A_i||_2 < 1``."""
    ss = _summaries(summaries)
    p = math.prod(s.sigma_max for s in ss)
    if not p < 1:
        raise HypothesisError(f"prod ||A_i||_2 = {p:.6g} is not < 1")
    return (1 + p) / (1 - p)


def oracle_cond(coefficients: Sequence, max_dim: int = DEFAULT_MAX_DIM) -> float:
    """Exact ``cond_2`` of the materialized Stein matrix (size-guarded)."""
    s = np.linalg.svd(materialize_stein(coefficients, max_dim), compute_uv=False)
    return math.inf if s[-1] == 0 else float(s[0] / s[-1])


def cond_report(coefficients: Sequence, max_dim: int = DEFAULT_MAX_DIM) -> list[dict]:
    """Every bound with its status: ``ok`` plus a value, or the failed hypothesis."""
    ss = _summaries(coefficients)
    rows = []

    def add(name, kind, fn):
        try:
            value = fn()
        except (HypothesisError, SingularityError) as exc:
            rows.append({"bound": name, "kind": kind, "status": "n/a", "value": math.nan, "note": str(exc)})
        else:
            rows.append({"bound": name, "kind": kind, "status": "ok", "value": value, "note": ""})

    for i, s in enumerate(ss):
        c, singular = matrix_cond(s.matrix)
        rows.append({
            "bound": f"cond(A{i + 1})", "kind": "coefficient", "status": "singular" if singular else "ok",
            "value": c, "note": "sigma_min < 1e-14 sigma_max" if singular else "",
        })
    add("min_singular_upper", "upper", lambda: cond_upper_prop21(ss))
    add("contractive_upper", "upper", lambda: contractive_upper_bound(ss))
    add("inverse_norm_upper", "upper", lambda: inv_norm_upper_and_cond(ss)[1])
    lower = cond_lower_from_gram(ss)
    for key in ("rayleigh", "pd"):
        if key in lower:
            rows.append({"bound": f"gram_{key}_lower", "kind": "lower", "status": "ok", "value": lower[key], "note": ""})
        else:
            rows.append({"bound": f"gram_{key}_lower", "kind": "lower", "status": "n/a", "value": math.nan,
                         "note": "hypothesis not met"})
    add("eigenvalue_ratio_lower", "lower", lambda: xu_lower_bound([s.eigenvalues for s in ss]))
    try:
        diag = diagonalizable_cond_bounds([s.matrix for s in ss])
    except HypothesisError as exc:
        diag = {}
        rows.append({"bound": "diagonalizable", "kind": "upper", "status": "n/a", "value": math.nan, "note": str(exc)})
    for key, value in diag.items():
        rows.append({"bound": f"diagonalizable_{key}", "kind": "upper", "status": "ok", "value": value, "note": ""})
    dim = math.prod(s.matrix.shape[0] for s in ss)
    if dim <= max_dim:
        rows.append({"bound": "oracle", "kind": "exact", "status": "ok",
                     "value": oracle_cond([s.matrix for s in ss], max_dim), "note": ""})
    return rows


def _kron_hermitian_quadratic(vectors, matrices) -> float:
    """Left-hand side of :func:`kron_rayleigh_product`, built explicitly (small sizes only)."""
    x = kron_chain(list(reversed([np.asarray(v) for v in vectors])))
    a = kron_chain(list(reversed([np.asarray(m) for m in matrices])))
    return float(x @ hermitian_part(a) @ x)


