"""Golub-Kahan bidiagonalization carried out directly on tensors.

Starting from ``V_1 = F / ||F||`` the process alternates operator and adjoint
applications::

    beta_{j+1} V_{j+1} = M(U_j) - alpha_j V_j
    alpha_j U_j        = M*(V_j) - beta_j U_{j-1}

giving orthonormal tensor bases ``V_1..V_{k+1}``, ``U_1..U_k`` and a lower
bidiagonal ``Tbar_k`` of size ``(k+1) x k`` with ``M(U_j) = sum_l V_l Tbar[l, j]``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import StateError
from .operators import LinearTensorOperator
from .tensor import norm

__all__ = [
    "LowerBidiagonal",
    "Breakdown",
    "GkbState",
    "gkb_init",
    "gkb_step",
    "run_to",
    "diagnostics",
    "write_diagnostics_csv",
    "BREAKDOWN_TOL",
]

BREAKDOWN_TOL = 1e-14


@dataclass(frozen=True)
class LowerBidiagonal:
    """Coefficients ``alpha_1..alpha_k`` and ``beta_1..beta_{k+1}``.

    ``beta_1`` is the norm of the right-hand side; it is not part of the
    matrices. ``T`` is ``k x k`` with diagonal ``alpha`` and subdiagonal
    ``beta_2..beta_k``; ``Tbar`` appends the row ``beta_{k+1} e_k^T``.
    """

    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=np.float64).ravel()
        b = np.array(self.betas, dtype=np.float64).ravel()
        if b.size != a.size + 1:
            raise ValueError(f"need len(betas) == len(alphas) + 1, got {b.size} and {a.size}")
        if np.any(a < 0) or np.any(b < 0):
            raise ValueError("bidiagonal coefficients must be nonnegative")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)

    @property
    def k(self) -> int:
        return self.alphas.size

    @property
    def beta1(self) -> float:
        return float(self.betas[0])

    @property
    def T(self) -> np.ndarray:
        k = self.k
        t = np.zeros((k, k))
        t[np.arange(k), np.arange(k)] = self.alphas
        if k > 1:
            t[np.arange(1, k), np.arange(k - 1)] = self.betas[1:k]
        return t

    @property
    def Tbar(self) -> np.ndarray:
        k = self.k
        t = np.zeros((k + 1, k))
        t[:k] = self.T
        if k > 0:
            t[k, k - 1] = self.betas[k]
        return t

    def leading(self, k: int) -> "LowerBidiagonal":
        """The factorization after only `k` steps."""
        if not 0 <= k <= self.k:
            raise ValueError(f"k={k} outside 0..{self.k}")
        return LowerBidiagonal(self.alphas[:k], self.betas[: k + 1])


class _RowStore:
    """Orthonormal basis vectors kept as rows of fixed-size blocks.

    Blocks avoid both per-vector Python loops and the copies a single growing
    array would need.
    """

    BLOCK = 32

    def __init__(self, dim: int):
        self.dim = dim
        self.blocks: list[np.ndarray] = []
        self.n = 0

    def __len__(self) -> int:
        return self.n

    def append(self, row: np.ndarray) -> None:
        j = self.n % self.BLOCK
        if j == 0:
            self.blocks.append(np.empty((self.BLOCK, self.dim)))
        self.blocks[-1][j] = row
        self.n += 1

    def __getitem__(self, i: int) -> np.ndarray:
        if i < 0:
            i += self.n
        if not 0 <= i < self.n:
            raise IndexError(i)
        return self.blocks[i // self.BLOCK][i % self.BLOCK]

    def _filled(self, count: int):
        for b, block in enumerate(self.blocks):
            rows = min(self.BLOCK, count - b * self.BLOCK)
            if rows <= 0:
                break
            yield block[:rows]

    def matrix(self, count: Optional[int] = None) -> np.ndarray:
        count = self.n if count is None else min(count, self.n)
        parts = list(self._filled(count))
        return np.concatenate(parts) if parts else np.zeros((0, self.dim))

    def coefficients(self, w: np.ndarray) -> np.ndarray:
        """Inner products of `w` with every stored row."""
        return np.concatenate([blk @ w for blk in self._filled(self.n)]) if self.n else np.zeros(0)

    def combine(self, c: np.ndarray) -> np.ndarray:
        """``sum_i c_i row_i`` over the first ``len(c)`` rows."""
        out = np.zeros(self.dim)
        for b, blk in enumerate(self._filled(len(c))):
            out += c[b * self.BLOCK : b * self.BLOCK + blk.shape[0]] @ blk
        return out


@dataclass(frozen=True)
class Breakdown:
    kind: str  # "beta_zero" or "alpha_zero"
    step: int


@dataclass
class GkbState:
    """Bases and coefficients after `k` complete steps.

    After a ``beta_zero`` breakdown ``V_{k+1}`` does not exist and
    ``beta_{k+1}`` is stored as 0; the ``k`` stored ``V`` tensors then span an
    invariant subspace.
    """

    shape: tuple
    beta1: float
    reorthogonalize: bool = True
    tol: float = BREAKDOWN_TOL
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    breakdown: Optional[Breakdown] = None
    scale: float = 0.0
    _v: _RowStore = field(default=None, repr=False)
    _u: _RowStore = field(default=None, repr=False)

    def __post_init__(self):
        self._v = _RowStore(self._dim)
        self._u = _RowStore(self._dim)

    @property
    def k(self) -> int:
        return len(self.alphas)

    @property
    def bidiag(self) -> LowerBidiagonal:
        return LowerBidiagonal(self.alphas, self.betas)

    def v(self, j: int) -> np.ndarray:
        """Basis tensor ``V_j`` (1-based, as in the recurrences)."""
        return self._v[j - 1].reshape(self.shape)

    def u(self, j: int) -> np.ndarray:
        return self._u[j - 1].reshape(self.shape)

    @property
    def num_v(self) -> int:
        return len(self._v)

    def v_basis(self, count: Optional[int] = None) -> np.ndarray:
        """Stack ``V_1..V_count`` along a trailing mode (default: all)."""
        m = self._v.matrix(count)
        return m.T.reshape(self.shape + (m.shape[0],))

    def u_basis(self, count: Optional[int] = None) -> np.ndarray:
        m = self._u.matrix(count)
        return m.T.reshape(self.shape + (m.shape[0],))

    def combine_u(self, y: np.ndarray) -> np.ndarray:
        """``sum_j y_j U_j`` over the first ``len(y)`` basis tensors."""
        y = np.asarray(y, dtype=np.float64)
        if y.size > len(self._u):
            raise ValueError(f"{y.size} coefficients for {len(self._u)} basis tensors")
        return self._u.combine(y.ravel()).reshape(self.shape)

    @property
    def _dim(self) -> int:
        return math.prod(self.shape)


def _cgs2(w: np.ndarray, basis: _RowStore) -> np.ndarray:
    # two classical Gram-Schmidt passes
    for _ in range(2):
        if not len(basis):
            break
        w -= basis.combine(basis.coefficients(w))
    return w


def _is_zero(value: float, state: GkbState) -> bool:
    return not value > state.tol * state.scale


def _extend_v(state: GkbState, op: LinearTensorOperator) -> None:
    """Append ``beta_{k+1}`` and ``V_{k+1}``."""
    k = state.k
    if len(state._v) >= state._dim:
        state.betas.append(0.0)
        state.breakdown = Breakdown("beta_zero", k + 1)
        return
    w = op.apply(state.u(k)).ravel().copy()
    w -= state.alphas[-1] * state._v[-1]
    if state.reorthogonalize:
        w = _cgs2(w, state._v)
    beta = math.sqrt(float(np.dot(w, w)))
    if _is_zero(beta, state):
        state.betas.append(0.0)
        state.breakdown = Breakdown("beta_zero", k + 1)
        return
    state.scale = max(state.scale, beta)
    state.betas.append(beta)
    state._v.append(w / beta)


def gkb_init(
    op: LinearTensorOperator,
    f: np.ndarray,
    *,
    reorthogonalize: bool = True,
    tol: float = BREAKDOWN_TOL,
) -> GkbState:
    """Start the process: ``beta_1, V_1, alpha_1, U_1`` and then ``beta_2, V_2``.

    The returned state has ``k == 1`` (or ``k == 0`` if ``M*(F) == 0``).

    Raises
    ------
    ValueError
        If `f` is zero.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != op.shape:
        raise ValueError(f"right-hand side shape {f.shape} != operator shape {op.shape}")
    beta1 = norm(f)
    if not beta1 > 0:
        raise ValueError("the right-hand side is zero; nothing to bidiagonalize")
    state = GkbState(shape=op.shape, beta1=beta1, reorthogonalize=reorthogonalize, tol=tol)
    state.betas.append(beta1)
    v1 = (f / beta1).ravel().copy()
    state._v.append(v1)
    w = op.apply_adjoint(v1.reshape(op.shape)).ravel().copy()
    alpha = math.sqrt(float(np.dot(w, w)))
    if not (alpha > 0 and math.isfinite(alpha)):
        state.breakdown = Breakdown("alpha_zero", 1)
        return state
    state.scale = alpha
    state.alphas.append(alpha)
    state._u.append(w / alpha)
    _extend_v(state, op)
    return state


def gkb_step(state: GkbState, op: LinearTensorOperator) -> GkbState:
    """Advance from ``k`` to ``k + 1``: append ``alpha, U`` then ``beta, V``.

    The state is modified in place and returned. If the new ``alpha`` vanishes
    the state keeps its ``k`` and records an ``alpha_zero`` breakdown.
    """
    if state.breakdown is not None:
        raise StateError(f"cannot step past breakdown {state.breakdown}")
    j = state.k + 1
    if len(state._u) >= state._dim:
        state.breakdown = Breakdown("alpha_zero", j)
        return state
    w = op.apply_adjoint(state.v(j)).ravel().copy()
    w -= state.betas[j - 1] * state._u[-1]
    if state.reorthogonalize:
        w = _cgs2(w, state._u)
    alpha = math.sqrt(float(np.dot(w, w)))
    if _is_zero(alpha, state):
        state.breakdown = Breakdown("alpha_zero", j)
        return state
    state.scale = max(state.scale, alpha)
    state.alphas.append(alpha)
    state._u.append(w / alpha)
    _extend_v(state, op)
    return state


def run_to(
    op: LinearTensorOperator,
    f: np.ndarray,
    k_max: int,
    *,
    reorthogonalize: bool = True,
    tol: float = BREAKDOWN_TOL,
) -> GkbState:
    """Run ``min(k_max, breakdown)`` steps."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    state = gkb_init(op, f, reorthogonalize=reorthogonalize, tol=tol)
    while state.k < k_max and state.breakdown is None:
        gkb_step(state, op)
    return state


def diagnostics(state: GkbState) -> list[dict]:
    """Per-step coefficients and orthogonality defects ``||B_j^T B_j - I||_F``."""
    vm = state._v.matrix()
    um = state._u.matrix()
    gv = vm @ vm.T
    gu = um @ um.T
    rows = []
    for j in range(1, state.k + 1):
        nv = min(j + 1, len(state._v))
        rows.append(
            {
                "j": j,
                "alpha": state.alphas[j - 1],
                "beta": state.betas[j],
                "v_defect": float(np.linalg.norm(gv[:nv, :nv] - np.eye(nv))),
                "u_defect": float(np.linalg.norm(gu[:j, :j] - np.eye(j))),
            }
        )
    return rows


def write_diagnostics_csv(state: GkbState, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["j", "alpha", "beta", "v_defect", "u_defect"])
        writer.writeheader()
        for row in diagnostics(state):
            writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
