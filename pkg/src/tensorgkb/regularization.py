"""Tikhonov regularization on the projected bidiagonal problem.

After ``k`` bidiagonalization steps the Tikhonov problem
``min ||M(X) - F||^2 + mu ||X||^2`` restricted to ``X = sum_j y_j U_j`` becomes
``min ||Tbar_k y - beta_1 e_1||^2 + mu ||y||^2``. With ``nu = 1/mu`` the
squared projected residual is::

    phi_k(mu) = beta_1^2 e_1^T (nu Tbar Tbar^T + I)^{-2} e_1

The k-point Gauss rule (built from the square ``T_k``) and the (k+1)-point
Gauss-Radau rule (built from ``Tbar_k``) bracket the *full-space* residual
function; the Gauss-Radau value coincides with ``phi_k`` itself. The
discrepancy principle picks ``nu`` from the Gauss value and certifies it with
the Gauss-Radau value, which keeps the residual in ``[eps, eta * eps]``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bidiag import GkbState, LowerBidiagonal, gkb_init, gkb_step
from .exceptions import (
    ConvergenceError,
    NeedsLargerKError,
    NoSolutionError,
    SingularityError,
)
from .operators import LinearTensorOperator
from .tensor import norm

__all__ = [
    "DiscrepancyConfig",
    "StepRecord",
    "TikhonovSolution",
    "phi",
    "gauss_bound",
    "radau_bound",
    "gauss_bound_derivative",
    "radau_bound_derivative",
    "newton_solve_nu",
    "radau_accept",
    "solve_projected_ls",
    "reconstruct",
    "residual_norm_projected",
    "stop_relative_change",
    "algorithm3",
    "algorithm4",
    "tikhonov_fixed_mu",
    "write_report_csv",
    "GUARD",
]


# relative guard band that keeps rounding from pushing residuals out of [eps, eta eps]
GUARD = 1e-9


@dataclass
class DiscrepancyConfig:
    """Parameters of the discrepancy-principle drivers.

    Attributes
    ----------
    epsilon : float
        Norm of the noise in the right-hand side.
    eta : float
        Safety factor > 1; the residual is driven into ``[eps, eta * eps]``.
    newton_tol : float
        Relative tolerance on the equation residual of the Newton solve.
    newton_max_iter : int
    k_max : int
        Largest number of bidiagonalization steps.
    """

    epsilon: float
    eta: float = 1.01
    newton_tol: float = 1e-8
    newton_max_iter: int = 50
    k_max: int = 200

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")
        if not self.eta > 1:
            raise ValueError("eta must be > 1")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be > 0")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if self.k_max < 2:
            raise ValueError("k_max must be >= 2")


@dataclass
class StepRecord:
    k: int
    alpha: float
    beta: float
    nu: float
    gauss: float
    radau: float
    residual: float
    error: float = math.nan


@dataclass
class TikhonovSolution:
    y: np.ndarray
    mu: float
    nu: float
    residual_norm: float
    x: np.ndarray
    k: int
    stop_reason: str
    history: list = field(default_factory=list)
    state: Optional[GkbState] = field(default=None, repr=False)


# -- shifted structured solves ------------------------------------------------


def _parts(bidiag: LowerBidiagonal, rule: str) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and subdiagonal of ``T`` (``rule="gauss"``) or ``Tbar`` (``"radau"``)."""
    k = bidiag.k
    return bidiag.alphas, bidiag.betas[1 : k if rule == "gauss" else k + 1]


class _Shifted:
    """Solve ``(nu M M^T + I) w = r`` for a lower bidiagonal ``M``.

    ``M`` is ``p x q`` with diagonal `d` (length ``q``) and subdiagonal `e`
    (length ``p - 1``). Givens rotations reduce the stacked ``[sqrt(nu) M^T; I]``
    to an upper bidiagonal ``R`` with ``R^T R = nu M M^T + I`` in O(p) work.
    """

    def __init__(self, d: np.ndarray, e: np.ndarray, nu: float):
        p, q = e.size + 1, d.size
        sq = math.sqrt(nu)
        dl, el = d.tolist(), e.tolist()
        diag = [0.0] * p
        sup = [0.0] * (p - 1)
        carry = 0.0
        hypot = math.hypot
        for j in range(p):
            a = hypot(carry, 1.0)
            if j < q:
                sd = sq * dl[j]
                r = hypot(a, sd)
                diag[j] = r
                if j + 1 < p:
                    b = sq * el[j]
                    sup[j] = sd / r * b
                    carry = a / r * b
            else:
                diag[j] = a
        self.diag, self.sup = diag, sup
        self.d, self.e = d, e

    def solve(self, rhs) -> np.ndarray:
        diag, sup = self.diag, self.sup
        p = len(diag)
        rhs = rhs.tolist() if isinstance(rhs, np.ndarray) else list(rhs)
        u = [0.0] * p
        prev = 0.0
        for j in range(p):
            prev = (rhs[j] - (sup[j - 1] * prev if j else 0.0)) / diag[j]
            u[j] = prev
        w = [0.0] * p
        nxt = 0.0
        for j in range(p - 1, -1, -1):
            nxt = (u[j] - (sup[j] * nxt if j < p - 1 else 0.0)) / diag[j]
            w[j] = nxt
        return np.array(w)

    def mt_times(self, v: np.ndarray) -> np.ndarray:
        """``M^T v``."""
        q = self.d.size
        out = self.d * v[:q]
        n = min(q, self.e.size)
        out[:n] += self.e[:n] * v[1 : n + 1]
        return out


def _e1(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[0] = 1.0
    return e


def _check_nu(nu: float) -> float:
    nu = float(nu)
    if not nu >= 0 or math.isnan(nu):
        raise ValueError(f"nu must be >= 0, got {nu}")
    return nu


def _quadrature(bidiag: LowerBidiagonal, rule: str, nu: float, slope: bool = False):
    """Quadrature value, or ``(value, d value / d nu)`` when `slope` is set."""
    if bidiag.k == 0:
        value = bidiag.beta1**2 if rule == "radau" else 0.0
        return (value, 0.0) if slope else value
    d, e = _parts(bidiag, rule)
    solver = _Shifted(d, e, nu)
    w = solver.solve(_e1(e.size + 1))
    value = bidiag.beta1**2 * float(w @ w)
    if not slope:
        return value
    # d/dnu beta1^2 e1^T (nu M M^T + I)^{-2} e1 = -2 beta1^2 e1^T (.)^{-3} M M^T e1
    z = solver.solve(w)
    return value, -2.0 * bidiag.beta1**2 * float(solver.mt_times(z) @ solver.mt_times(w))


def gauss_bound(bidiag: LowerBidiagonal, nu: float) -> float:
    """k-point Gauss rule ``beta_1^2 e_1^T (nu T T^T + I)^{-2} e_1`` (a lower bound)."""
    return _quadrature(bidiag, "gauss", _check_nu(nu))


def radau_bound(bidiag: LowerBidiagonal, nu: float) -> float:
    """(k+1)-point Gauss-Radau rule built from ``Tbar`` (an upper bound)."""
    return _quadrature(bidiag, "radau", _check_nu(nu))


def gauss_bound_derivative(bidiag: LowerBidiagonal, nu: float) -> float:
    return _quadrature(bidiag, "gauss", _check_nu(nu), slope=True)[1]


def radau_bound_derivative(bidiag: LowerBidiagonal, nu: float) -> float:
    return _quadrature(bidiag, "radau", _check_nu(nu), slope=True)[1]


def phi(bidiag: LowerBidiagonal, mu: float) -> float:
    """Squared projected Tikhonov residual ``||Tbar y_mu - beta_1 e_1||^2``.

    Evaluated as ``beta_1^2 e_1^T (mu^{-1} Tbar Tbar^T + I)^{-2} e_1``; it
    tends to ``beta_1^2`` as ``mu -> inf``.
    """
    mu = float(mu)
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    return radau_bound(bidiag, 1.0 / mu)


def _limit_at_infinity(bidiag: LowerBidiagonal, rule: str) -> float:
    """``lim_{nu -> inf}`` of the quadrature value: ``beta_1^2 ||P e_1||^2``, P onto ``null(M^T)``."""
    d, e = _parts(bidiag, rule)
    if bidiag.k == 0:
        return bidiag.beta1**2
    if np.all(d > 0) and np.all(e > 0):
        if rule == "gauss":
            return 0.0
        # null(Tbar^T) is spanned by n with n_{j+1} = -alpha_j n_j / beta_{j+1}
        logs = np.concatenate([[0.0], np.cumsum(np.log(d) - np.log(e))])
        return bidiag.beta1**2 * math.exp(-float(np.logaddexp.reduce(2 * logs)))
    m = bidiag.T if rule == "gauss" else bidiag.Tbar
    rhs = bidiag.beta1 * _e1(m.shape[0])
    y, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    r = m @ y - rhs
    return float(r @ r)


def newton_solve_nu(
    bidiag: LowerBidiagonal,
    config: DiscrepancyConfig,
    *,
    rule: str = "gauss",
    target: Optional[float] = None,
    full_output: bool = False,
    nu0: float = 0.0,
):
    """Solve ``G_k f_nu = eps^2`` for ``nu > 0`` by Newton's method from ``nu = 0``.

    The quadrature value is decreasing and convex in ``nu``. Newton's method
    is applied to its inverse square root, an increasing concave function with
    the same root, so the iterates increase monotonically toward the root and
    converge quadratically.

    Parameters
    ----------
    bidiag : LowerBidiagonal
    config : DiscrepancyConfig
    rule : {"gauss", "radau"}
        Which quadrature value to drive to `target`.
    target : float, optional
        Right-hand side of the equation; defaults to ``epsilon**2``.
    full_output : bool
        Also return the list of iterates.
    nu0 : float
        Starting point; must lie left of the root. A start that turns out to
        be past the root falls back to ``nu = 0``.

    Raises
    ------
    NoSolutionError
        ``target >= beta_1**2``: no positive root.
    NeedsLargerKError
        `target` is below the ``nu -> inf`` limit of the rule at this k.
    ConvergenceError
        ``newton_max_iter`` reached.
    """
    if rule not in ("gauss", "radau"):
        raise ValueError(f"unknown rule {rule!r}")
    target = config.epsilon**2 if target is None else float(target)
    if not target > 0:
        raise ValueError("the discrepancy target must be positive")
    if target >= bidiag.beta1**2:
        raise NoSolutionError(
            f"target {target:.3e} >= beta_1^2 = {bidiag.beta1**2:.3e}: noise exceeds the data"
        )
    if target <= _limit_at_infinity(bidiag, rule):
        raise NeedsLargerKError(f"target not attainable with k={bidiag.k}")

    # Newton on h(nu) = value^(-1/2), which is increasing and concave (a power
    # mean of affine functions of nu): iterates from nu = 0 rise monotonically
    # to the root without the slow start the convex value itself shows.
    h_target = target**-0.5
    nu = _check_nu(nu0)
    iterates = [nu]
    for _ in range(config.newton_max_iter):
        g, d = _quadrature(bidiag, rule, nu, slope=True)
        if not d < 0:
            raise ConvergenceError(f"nonnegative slope {d} at nu={nu}")
        step = (h_target - g**-0.5) / (-0.5 * g**-1.5 * d)
        if len(iterates) == 1 and nu > 0 and g < target * (1 - config.newton_tol):
            # the warm start is past the root
            nu = 0.0
            iterates = [nu]
            g, d = _quadrature(bidiag, rule, nu, slope=True)
            step = (h_target - g**-0.5) / (-0.5 * g**-1.5 * d)
        if abs(g - target) <= config.newton_tol * target:
            if step > 0:
                # still left of the root: one more step polishes nu without crossing it
                nu += step
                iterates.append(nu)
            return (nu, iterates) if full_output else nu
        if not step > 0:
            # rounding carried an iterate past the root
            if abs(g - target) <= math.sqrt(config.newton_tol) * target:
                return (nu, iterates) if full_output else nu
            raise ConvergenceError(f"Newton crossed the root at nu={nu:.6e}")
        nu += step
        iterates.append(nu)
    if abs(_quadrature(bidiag, rule, nu) - target) <= config.newton_tol * target:
        return (nu, iterates) if full_output else nu
    raise ConvergenceError(
        f"Newton did not converge in {config.newton_max_iter} iterations (nu={nu:.6e})"
    )


def radau_accept(bidiag: LowerBidiagonal, nu: float, config: DiscrepancyConfig) -> bool:
    """True iff ``R_{k+1} f_nu <= eta^2 eps^2`` (the residual is certified).

    The comparison keeps a relative guard band of :data:`GUARD` so that the
    residual of the reconstructed tensor, which agrees with the projected one
    only up to rounding, still lands inside the window.
    """
    return radau_bound(bidiag, nu) <= (config.eta * config.epsilon) ** 2 * (1 - GUARD)


def solve_projected_ls(bidiag: LowerBidiagonal, mu: float) -> np.ndarray:
    """Minimizer of ``||Tbar y - beta_1 e_1||^2 + mu ||y||^2``.

    Givens rotations reduce the stacked ``[Tbar; sqrt(mu) I]`` and its
    right-hand side ``[beta_1 e_1; 0]`` to upper bidiagonal form in O(k) work.

    Raises
    ------
    SingularityError
        ``mu == 0`` and ``Tbar`` is numerically rank deficient.
    """
    mu = float(mu)
    if not mu >= 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    k = bidiag.k
    if k == 0:
        return np.zeros(0)
    a, b = bidiag.alphas, bidiag.betas
    damp = math.sqrt(mu)
    rho = np.empty(k)
    theta = np.zeros(k)
    phi_ = np.empty(k)
    rho_bar, phi_bar = a[0], bidiag.beta1
    for j in range(k):
        rho_hat = math.hypot(rho_bar, damp)
        if rho_hat > 0:
            phi_bar *= rho_bar / rho_hat
        r = math.hypot(rho_hat, b[j + 1])
        if r == 0:
            raise SingularityError(f"column {j + 1} of the projected matrix is zero")
        c, s = rho_hat / r, b[j + 1] / r
        rho[j], phi_[j] = r, c * phi_bar
        nxt = a[j + 1] if j + 1 < k else 0.0
        theta[j] = s * nxt
        rho_bar, phi_bar = c * nxt, -s * phi_bar
    if rho.min() <= np.finfo(float).eps * max(rho.max(), 1e-300) * k:
        raise SingularityError("projected least-squares matrix is rank deficient")
    y = np.empty(k)
    y[-1] = phi_[-1] / rho[-1]
    for j in range(k - 2, -1, -1):
        y[j] = (phi_[j] - theta[j] * y[j + 1]) / rho[j]
    return y


def reconstruct(state: GkbState, y: np.ndarray) -> np.ndarray:
    """``X = sum_j y_j U_j`` for ``j = 1..k``.

    The ``U`` tensors span the search space: ``M(U_j) = alpha_j V_j +
    beta_{j+1} V_{j+1}``, hence ``M(X) - F = sum_l V_l (Tbar y - beta_1 e_1)_l``
    and the residual norms agree.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size != state.k:
        raise ValueError(f"need {state.k} coefficients, got {y.size}")
    return state.combine_u(y)


def residual_norm_projected(bidiag: LowerBidiagonal, y: np.ndarray) -> float:
    """``||Tbar y - beta_1 e_1||``, equal to ``||M(X) - F||`` for the reconstructed X."""
    r = bidiag.Tbar @ np.asarray(y, dtype=np.float64)
    r[0] -= bidiag.beta1
    return float(np.linalg.norm(r))


def stop_relative_change(x_prev: np.ndarray, x_curr: np.ndarray, tau: float) -> bool:
    """True iff ``||x_curr - x_prev|| / ||x_prev|| <= tau``."""
    denom = norm(x_prev)
    if denom == 0:
        return False
    return norm(np.asarray(x_curr) - np.asarray(x_prev)) / denom <= tau


# -- drivers ------------------------------------------------------------------


def _grow(state: GkbState, op: LinearTensorOperator, k: int) -> None:
    while state.k < k and state.breakdown is None:
        gkb_step(state, op)


def _require_noise(config: DiscrepancyConfig) -> None:
    if not config.epsilon > 0:
        raise ValueError(
            "epsilon = 0: the discrepancy principle needs a noise level; "
            "use tikhonov_fixed_mu with an explicit mu and a relative-change stop"
        )


def _check_rule(stop_rule: str, tau: Optional[float]) -> None:
    if stop_rule not in ("discrepancy", "relative_change"):
        raise ValueError(f"unknown stop rule {stop_rule!r}")
    if stop_rule == "relative_change" and not (tau is not None and tau > 0):
        raise ValueError("the relative-change rule needs tau > 0")


def _record(bidiag, nu, y, x, x_ref) -> StepRecord:
    k = bidiag.k
    finite = nu is not None and math.isfinite(nu)
    return StepRecord(
        k=k,
        alpha=float(bidiag.alphas[-1]) if k else math.nan,
        beta=float(bidiag.betas[-1]),
        nu=float(nu) if nu is not None else math.nan,
        gauss=gauss_bound(bidiag, nu) if finite else math.nan,
        radau=radau_bound(bidiag, nu) if finite else math.nan,
        residual=residual_norm_projected(bidiag, y) if y is not None else math.nan,
        error=(norm(x - x_ref) / norm(x_ref)) if (x is not None and x_ref is not None) else math.nan,
    )


def _finish(state, bidiag, y, mu, nu, stop_reason, history, keep_state) -> TikhonovSolution:
    x = reconstruct(state, y)
    return TikhonovSolution(
        y=y,
        mu=mu,
        nu=nu,
        residual_norm=residual_norm_projected(bidiag, y),
        x=x,
        k=bidiag.k,
        stop_reason=stop_reason,
        history=history,
        state=state if keep_state else None,
    )


def _inverse(v: float) -> float:
    if v == 0:
        return math.inf
    if math.isinf(v):
        return 0.0
    return 1.0 / v


def algorithm3(
    op: LinearTensorOperator,
    f: np.ndarray,
    config: DiscrepancyConfig,
    *,
    x_ref: Optional[np.ndarray] = None,
    stop_rule: str = "discrepancy",
    tau: Optional[float] = None,
    reorthogonalize: bool = True,
    keep_state: bool = False,
) -> TikhonovSolution:
    """Bidiagonalization-Tikhonov with Gauss / Gauss-Radau parameter choice.

    From ``k = 2`` on, ``nu`` solves ``G_k f_nu = eps^2``; the step count grows
    until ``R_{k+1} f_nu <= eta^2 eps^2``. Then ``y`` solves the projected
    problem with ``mu = 1/nu`` and ``X = sum y_j U_j``, so that
    ``eps <= ||M(X) - F|| <= eta * eps``.

    With ``stop_rule="relative_change"`` the same ``nu`` is used at every k but
    the loop stops once consecutive iterates differ by at most `tau`
    (relatively) instead of on the Gauss-Radau certificate.

    Raises
    ------
    ValueError
        ``epsilon == 0``.
    NoSolutionError
        ``epsilon >= ||F||``.
    ConvergenceError
        No ``nu`` could be computed for any k.
    """
    _require_noise(config)
    _check_rule(stop_rule, tau)
    f = np.asarray(f, dtype=np.float64)
    if config.epsilon >= norm(f):
        raise NoSolutionError("noise norm is not smaller than the data norm")
    state = gkb_init(op, f, reorthogonalize=reorthogonalize)
    history: list[StepRecord] = []
    best = None  # (bidiag, nu, y)
    x_prev = None
    k = 2
    while True:
        _grow(state, op, k)
        bidiag = state.bidiag
        nu = None
        if bidiag.k > 0:
            try:
                # the Gauss value grows with k, so the last root is a valid start
                nu = newton_solve_nu(bidiag, config, target=config.epsilon**2 * (1 + GUARD),
                                     nu0=best[1] if best is not None else 0.0)
            except (NeedsLargerKError, ConvergenceError):
                nu = None
        y = solve_projected_ls(bidiag, 1.0 / nu) if nu is not None else None
        x = None
        if y is not None and (x_ref is not None or stop_rule == "relative_change"):
            x = reconstruct(state, y)
        history.append(_record(bidiag, nu, y, x, x_ref))
        if y is not None:
            best = (bidiag, nu, y)
            if stop_rule == "discrepancy" and radau_accept(bidiag, nu, config):
                return _finish(state, bidiag, y, 1.0 / nu, nu, "discrepancy", history, keep_state)
            if stop_rule == "relative_change":
                if x_prev is not None and stop_relative_change(x_prev, x, tau):
                    return _finish(state, bidiag, y, 1.0 / nu, nu, "relative_change", history, keep_state)
                x_prev = x
        reason = None
        if state.breakdown is not None:
            reason = "breakdown"
        elif k >= config.k_max:
            reason = "k_max"
        if reason:
            if best is None:
                raise ConvergenceError("no regularization parameter could be determined")
            b, nu_b, y_b = best
            return _finish(state, b, y_b, 1.0 / nu_b, nu_b, reason, history, keep_state)
        k += 1


def _discrepancy_nu(bidiag: LowerBidiagonal, config: DiscrepancyConfig) -> float:
    """``nu`` with ``phi_k(1/nu) <= (eta eps)^2`` and as close to equality as Newton gets."""
    target = (config.eta * config.epsilon) ** 2 * (1 - GUARD)
    nu = newton_solve_nu(bidiag, config, rule="radau", target=target)
    # Newton stops just left of the root; nudge across it so the bound holds
    for _ in range(20):
        g = radau_bound(bidiag, nu) - target
        if g <= 0:
            return nu
        nu -= 2.0 * g / radau_bound_derivative(bidiag, nu)
    raise ConvergenceError("could not place nu on the safe side of the discrepancy root")


def algorithm4(
    op: LinearTensorOperator,
    f: np.ndarray,
    config: DiscrepancyConfig,
    *,
    x_ref: Optional[np.ndarray] = None,
    stop_rule: str = "discrepancy",
    tau: Optional[float] = None,
    reorthogonalize: bool = True,
    keep_state: bool = False,
) -> TikhonovSolution:
    """Bidiagonalization-Tikhonov with the discrepancy principle on the projected problem.

    For ``k = 1, 2, ...`` choose ``mu_k`` so that the projected residual equals
    ``eta * eps``; when even ``mu -> 0`` leaves a larger residual, take
    ``mu_k = 0`` and continue. Stop once the projected residual is at most
    ``eta * eps`` (or, with ``stop_rule="relative_change"``, once consecutive
    iterates agree to `tau`).
    """
    _require_noise(config)
    _check_rule(stop_rule, tau)
    f = np.asarray(f, dtype=np.float64)
    if config.epsilon >= norm(f):
        raise NoSolutionError("noise norm is not smaller than the data norm")
    state = gkb_init(op, f, reorthogonalize=reorthogonalize)
    if state.k == 0:
        raise ConvergenceError("M*(F) = 0: the data are orthogonal to the range")
    history: list[StepRecord] = []
    target = (config.eta * config.epsilon) ** 2 * (1 - GUARD)
    x_prev = None
    k = 1
    while True:
        _grow(state, op, k)
        bidiag = state.bidiag
        if _limit_at_infinity(bidiag, "radau") > target:
            nu = math.inf
        else:
            nu = _discrepancy_nu(bidiag, config)
        mu = _inverse(nu)
        y = solve_projected_ls(bidiag, mu)
        residual = residual_norm_projected(bidiag, y)
        x = None
        if x_ref is not None or stop_rule == "relative_change":
            x = reconstruct(state, y)
        history.append(_record(bidiag, nu, y, x, x_ref))
        if stop_rule == "discrepancy" and residual <= config.eta * config.epsilon:
            return _finish(state, bidiag, y, mu, nu, "discrepancy", history, keep_state)
        if stop_rule == "relative_change":
            if x_prev is not None and stop_relative_change(x_prev, x, tau):
                return _finish(state, bidiag, y, mu, nu, "relative_change", history, keep_state)
            x_prev = x
        if state.breakdown is not None:
            return _finish(state, bidiag, y, mu, nu, "breakdown", history, keep_state)
        if k >= config.k_max:
            return _finish(state, bidiag, y, mu, nu, "k_max", history, keep_state)
        k += 1


def tikhonov_fixed_mu(
    op: LinearTensorOperator,
    f: np.ndarray,
    mu: float,
    k_max: int,
    *,
    tau: Optional[float] = None,
    x_ref: Optional[np.ndarray] = None,
    reorthogonalize: bool = True,
    keep_state: bool = False,
) -> TikhonovSolution:
    """Projected Tikhonov solution with a fixed ``mu`` (no noise level needed).

    Runs up to `k_max` steps (or breakdown); with `tau` given, stops early once
    consecutive iterates change by at most `tau`.
    """
    state = gkb_init(op, np.asarray(f, dtype=np.float64), reorthogonalize=reorthogonalize)
    history: list[StepRecord] = []
    x_prev = None
    nu = _inverse(mu)
    k = 1
    while True:
        _grow(state, op, k)
        bidiag = state.bidiag
        y = solve_projected_ls(bidiag, mu)
        x = reconstruct(state, y) if (tau is not None or x_ref is not None) else None
        history.append(_record(bidiag, nu, y, x, x_ref))
        if tau is not None:
            if x_prev is not None and stop_relative_change(x_prev, x, tau):
                return _finish(state, bidiag, y, mu, nu, "relative_change", history, keep_state)
            x_prev = x
        if state.breakdown is not None:
            return _finish(state, bidiag, y, mu, nu, "breakdown", history, keep_state)
        if k >= k_max:
            return _finish(state, bidiag, y, mu, nu, "k_max", history, keep_state)
        k += 1


REPORT_COLUMNS = ["k", "alpha", "beta", "nu", "gauss", "radau", "residual", "error"]


def write_report_csv(solution: TikhonovSolution, path: str | os.PathLike) -> None:
    """Per-step solver report: coefficients, ``nu``, both bounds, residual, error."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for rec in solution.history:
            writer.writerow(
                [rec.k] + [f"{getattr(rec, c):.17g}" for c in REPORT_COLUMNS[1:]]
            )
