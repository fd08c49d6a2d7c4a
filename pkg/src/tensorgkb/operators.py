"""Linear operators on tensors: Sylvester, Stein and user-supplied ones.

The Sylvester operator is ``X -> sum_n X x_n A_n`` and the Stein operator is
``X -> X - X x_0 A_0 x_1 A_1 ... x_{N-1} A_{N-1}``. Both have adjoints obtained
by transposing every coefficient matrix.
"""

from __future__ import annotations

import math
import os
from typing import Callable, Sequence

import numpy as np
import scipy.io
import scipy.sparse as sp

from .exceptions import CapacityError, ContractError, FormatError, ShapeError
from .tensor import (
    as_tensor,
    check_shape,
    devec,
    inner,
    kron_chain,
    n_mode_product,
    norm,
    read_tensor,
    vec,
)

__all__ = [
    "LinearTensorOperator",
    "SylvesterOperator",
    "SteinOperator",
    "MatrixFreeOperator",
    "make_matrix_free",
    "sylvester_apply",
    "sylvester_adjoint",
    "stein_apply",
    "stein_adjoint",
    "materialize_sylvester",
    "materialize_stein",
    "materialize",
    "verify_adjoint",
    "load_matrix",
    "DEFAULT_MAX_DIM",
]

DEFAULT_MAX_DIM = 4096


def _freeze(a):
    """Private read-only copy of a coefficient matrix (dense or sparse)."""
    if sp.issparse(a):
        a = sp.csr_array(a, dtype=np.float64, copy=True)
        a.data.setflags(write=False)
        return a
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim != 2:
        raise ShapeError(f"coefficient must be a matrix, got {a.ndim} dims")
    a.setflags(write=False)
    return a


def _transpose(a):
    if sp.issparse(a):
        return _freeze(a.T)
    t = np.ascontiguousarray(a.T)
    t.setflags(write=False)
    return t


def _coefficients(mats: Sequence) -> tuple:
    if len(mats) < 1:
        raise ShapeError("need at least one coefficient matrix")
    mats = tuple(_freeze(a) for a in mats)
    for n, a in enumerate(mats):
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"coefficient {n} is not square: {a.shape}")
    return mats


def _dense(a) -> np.ndarray:
    return a.toarray() if sp.issparse(a) else np.asarray(a)


class LinearTensorOperator:
    """A linear map on tensors of a fixed shape, with its adjoint.

    Subclasses implement :meth:`_apply` and :meth:`_apply_adjoint`; the public
    methods check shapes.
    """

    def __init__(self, shape: Sequence[int]):
        self.shape = check_shape(shape)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.shape:
            raise ShapeError(f"operator acts on shape {self.shape}, got {x.shape}")
        return x

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self._apply(self._check(x))

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        return self._apply_adjoint(self._check(y))

    __call__ = apply

    def _apply(self, x):
        raise NotImplementedError

    def _apply_adjoint(self, y):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self.shape})"


class _KroneckerStructured(LinearTensorOperator):
    def __init__(self, coefficients: Sequence):
        self.coefficients = _coefficients(coefficients)
        self._transposed = tuple(_transpose(a) for a in self.coefficients)
        super().__init__([a.shape[0] for a in self.coefficients])


class SylvesterOperator(_KroneckerStructured):
    """``X -> X x_0 A_0 + X x_1 A_1 + ... + X x_{N-1} A_{N-1}``."""

    def _apply(self, x):
        return _sylvester(self.coefficients, x)

    def _apply_adjoint(self, y):
        return _sylvester(self._transposed, y)

    def materialize(self, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
        return materialize_sylvester(self.coefficients, max_dim)


class SteinOperator(_KroneckerStructured):
    """``X -> X - X x_0 A_0 x_1 A_1 ... x_{N-1} A_{N-1}``."""

    def _apply(self, x):
        return _stein(self.coefficients, x)

    def _apply_adjoint(self, y):
        return _stein(self._transposed, y)

    def materialize(self, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
        return materialize_stein(self.coefficients, max_dim)


def _sylvester(mats, x):
    out = np.zeros(x.shape)
    for n, a in enumerate(mats):
        out += n_mode_product(x, a, n)
    return out


def _stein(mats, x):
    # chained products run mode 0 -> N-1; the order is pinned for reproducibility
    y = x
    for n, a in enumerate(mats):
        y = n_mode_product(y, a, n)
    return x - y


def _conforming(mats, x) -> np.ndarray:
    x = as_tensor(x)
    if x.ndim != len(mats):
        raise ShapeError(f"{len(mats)} coefficients for a {x.ndim}-mode tensor")
    for n, a in enumerate(mats):
        if a.shape != (x.shape[n], x.shape[n]):
            raise ShapeError(f"mode {n}: coefficient {a.shape} vs extent {x.shape[n]}")
    return x


def sylvester_apply(coefficients: Sequence, x: np.ndarray) -> np.ndarray:
    """Sum of the n-mode products of `x` with each coefficient."""
    return _sylvester(coefficients, _conforming(coefficients, x))


def sylvester_adjoint(coefficients: Sequence, y: np.ndarray) -> np.ndarray:
    return _sylvester([a.T for a in coefficients], _conforming(coefficients, y))


def stein_apply(coefficients: Sequence, x: np.ndarray) -> np.ndarray:
    return _stein(coefficients, _conforming(coefficients, x))


def stein_adjoint(coefficients: Sequence, y: np.ndarray) -> np.ndarray:
    return _stein([a.T for a in coefficients], _conforming(coefficients, y))


class MatrixFreeOperator(LinearTensorOperator):
    """Wrap user callables; every result is checked for shape."""

    def __init__(self, shape, apply_fn: Callable, adjoint_fn: Callable):
        super().__init__(shape)
        self._fn = apply_fn
        self._adj = adjoint_fn

    def _checked(self, fn, x, what):
        y = np.asarray(fn(x), dtype=np.float64)
        if y.shape != self.shape:
            raise ContractError(f"{what} returned shape {y.shape}, expected {self.shape}")
        return y

    def _apply(self, x):
        return self._checked(self._fn, x, "apply")

    def _apply_adjoint(self, y):
        return self._checked(self._adj, y, "adjoint")


def make_matrix_free(shape, apply_fn: Callable, adjoint_fn: Callable) -> MatrixFreeOperator:
    """Build an operator from an apply function and its adjoint."""
    return MatrixFreeOperator(shape, apply_fn, adjoint_fn)


def _guard(dim: int, max_dim: int) -> None:
    if dim > max_dim:
        raise CapacityError(f"refusing to materialize a {dim}x{dim} matrix (guard {max_dim})")


def materialize_sylvester(coefficients: Sequence, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Dense ``sum_j I (x) ... (x) A_j (x) ... (x) I`` acting on ``vec(X)``."""
    mats = [_dense(a) for a in _coefficients(coefficients)]
    dim = math.prod(a.shape[0] for a in mats)
    _guard(dim, max_dim)
    total = np.zeros((dim, dim))
    for j in range(len(mats)):
        factors = [np.eye(a.shape[0]) for a in mats]
        factors[j] = mats[j]
        total += kron_chain(factors)
    return total


def materialize_stein(coefficients: Sequence, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Dense ``I - A_{N-1} (x) ... (x) A_0`` acting on ``vec(X)``."""
    mats = [_dense(a) for a in _coefficients(coefficients)]
    dim = math.prod(a.shape[0] for a in mats)
    _guard(dim, max_dim)
    return np.eye(dim) - kron_chain(mats)


def materialize(op: LinearTensorOperator, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Dense matrix of any operator, built column by column from basis tensors."""
    _guard(op.size, max_dim)
    cols = np.empty((op.size, op.size))
    e = np.zeros(op.size)
    for i in range(op.size):
        e[i] = 1.0
        cols[:, i] = vec(op.apply(devec(e, op.shape)))
        e[i] = 0.0
    return cols


def verify_adjoint(op: LinearTensorOperator, trials: int = 5, seed: int = 0) -> float:
    """Largest relative defect ``|<op X, Y> - <X, op* Y>| / (||op X|| ||Y||)``.

    `X` and `Y` are standard-normal tensors drawn from ``default_rng(seed)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(op.shape)
        y = rng.standard_normal(op.shape)
        ax = op.apply(x)
        defect = abs(inner(ax, y) - inner(x, op.apply_adjoint(y)))
        worst = max(worst, defect / (norm(ax) * norm(y) + np.finfo(float).tiny))
    return worst


def load_matrix(path: str | os.PathLike):
    """Load a coefficient matrix from MatrixMarket (``.mtx``) or the tensor text format."""
    path = os.fspath(path)
    if path.endswith((".mtx", ".mtx.gz")):
        try:
            m = scipy.io.mmread(path)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        return sp.csr_array(m) if sp.issparse(m) else np.asarray(m, dtype=np.float64)
    m = read_tensor(path)
    if m.ndim != 2:
        raise ShapeError(f"{path}: expected a 2-mode tensor, got {m.ndim} modes")
    return m
