"""Dense N-mode tensors and the multilinear primitives used throughout.

Tensors are plain float64 :class:`numpy.ndarray` objects. Modes are indexed
from 0, like numpy axes. The *linearization* of a tensor is first-index-fastest
(Fortran order), so that::

    vec(X x_0 A0 x_1 A1 ... x_{N-1} A_{N-1}) == kron(A_{N-1}, ..., A0) @ vec(X)

A *stack* of tensors (an (N+1)-mode array) stores its column tensors along the
last axis: ``stack[..., j]`` is column ``j``.
"""

from __future__ import annotations

import math
import os
from functools import reduce
from typing import Sequence

import numpy as np

from .exceptions import FormatError, ShapeError

__all__ = [
    "as_tensor",
    "check_shape",
    "vec",
    "devec",
    "matricize",
    "dematricize",
    "n_mode_product",
    "multi_mode_product",
    "mode_contract_vector",
    "inner",
    "norm",
    "as_stack",
    "contracted_product",
    "stack_times_matrix",
    "stack_times_vector",
    "kron_chain",
    "rel_diff",
    "read_tensor",
    "write_tensor",
]


def check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    """Validate a tensor shape and return it as a tuple of ints."""
    shape = tuple(int(s) for s in shape)
    if len(shape) < 1:
        raise ShapeError("a tensor needs at least one mode")
    if any(s < 1 for s in shape):
        raise ShapeError(f"all extents must be >= 1, got {shape}")
    return shape


def as_tensor(x) -> np.ndarray:
    """Return `x` as a float64 array with at least one mode."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    check_shape(x.shape)
    return x


def _check_mode(x: np.ndarray, n: int) -> int:
    if not 0 <= n < x.ndim:
        raise ShapeError(f"mode {n} out of range for a {x.ndim}-mode tensor")
    return n


def vec(x: np.ndarray) -> np.ndarray:
    """Vectorize first-index-fastest."""
    return np.asarray(x, dtype=np.float64).ravel(order="F")


def devec(v: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec`."""
    shape = check_shape(shape)
    v = np.asarray(v, dtype=np.float64)
    if v.size != math.prod(shape):
        raise ShapeError(f"cannot reshape {v.size} values into {shape}")
    return v.reshape(shape, order="F")


def matricize(x: np.ndarray, n: int) -> np.ndarray:
    """Mode-`n` unfolding ``X_(n)`` of size ``I_n x prod_{m != n} I_m``.

    Columns are the mode-`n` fibers, ordered first-index-fastest over the
    remaining modes.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_mode(x, n)
    return np.moveaxis(x, n, 0).reshape(x.shape[n], -1, order="F")


def dematricize(m: np.ndarray, n: int, shape: Sequence[int]) -> np.ndarray:
    """Fold a mode-`n` unfolding back into a tensor of the given `shape`."""
    shape = check_shape(shape)
    if not 0 <= n < len(shape):
        raise ShapeError(f"mode {n} out of range for shape {shape}")
    m = np.asarray(m, dtype=np.float64)
    rest = shape[:n] + shape[n + 1:]
    if m.shape != (shape[n], math.prod(rest)):
        raise ShapeError(f"unfolding of shape {m.shape} does not fit {shape} along mode {n}")
    folded = m.reshape((shape[n],) + rest, order="F")
    return np.moveaxis(folded, 0, n)


def n_mode_product(x: np.ndarray, u, n: int) -> np.ndarray:
    """Return ``X x_n U``.

    Parameters
    ----------
    x : ndarray
        Tensor of shape ``(I_0, ..., I_{N-1})``.
    u : ndarray or scipy sparse matrix
        Matrix of shape ``(J, I_n)``.
    n : int
        Mode (0-based).

    Returns
    -------
    ndarray
        Tensor with extent ``J`` in mode `n`.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_mode(x, n)
    if u.ndim != 2 or u.shape[1] != x.shape[n]:
        raise ShapeError(
            f"mode {n}: matrix has {u.shape[-1]} columns but the tensor extent is {x.shape[n]}"
        )
    out_shape = x.shape[:n] + (u.shape[0],) + x.shape[n + 1:]
    return dematricize(np.asarray(u @ matricize(x, n)), n, out_shape)


def multi_mode_product(x: np.ndarray, mats: Sequence) -> np.ndarray:
    """Return ``X x_0 mats[0] x_1 mats[1] ...``, applied from mode 0 upward."""
    x = np.asarray(x, dtype=np.float64)
    if len(mats) != x.ndim:
        raise ShapeError(f"need {x.ndim} matrices, got {len(mats)}")
    for n, a in enumerate(mats):
        x = n_mode_product(x, a, n)
    return x


def mode_contract_vector(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    """Contract mode `n` of `x` with the vector `y` (drops mode `n`)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_mode(x, n)
    if y.ndim != 1 or y.shape[0] != x.shape[n]:
        raise ShapeError(f"mode {n}: vector length {y.shape} does not match extent {x.shape[n]}")
    return np.tensordot(x, y, axes=([n], [0]))


def inner(x: np.ndarray, y: np.ndarray) -> float:
    """Frobenius inner product of two tensors of equal shape."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"inner product of shapes {x.shape} and {y.shape}")
    return float(np.dot(x.ravel(), y.ravel()))


def norm(x: np.ndarray) -> float:
    """Frobenius norm, ``sqrt(inner(x, x))``."""
    return math.sqrt(inner(x, x))


def as_stack(columns: Sequence[np.ndarray]) -> np.ndarray:
    """Stack equally shaped tensors along a new trailing mode."""
    if len(columns) == 0:
        raise ShapeError("a stack needs at least one column tensor")
    shapes = {np.shape(c) for c in columns}
    if len(shapes) != 1:
        raise ShapeError(f"column tensors have different shapes: {sorted(shapes)}")
    return np.stack([np.asarray(c, dtype=np.float64) for c in columns], axis=-1)


def contracted_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of mutual inner products of the column tensors of two stacks.

    Entry ``(i, j)`` is ``inner(a[..., i], b[..., j])``; for 2-mode stacks this
    is ``a.T @ b``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim < 2 or a.shape[:-1] != b.shape[:-1]:
        raise ShapeError(f"column shapes differ: {a.shape[:-1]} vs {b.shape[:-1]}")
    am = a.reshape(-1, a.shape[-1])
    bm = b.reshape(-1, b.shape[-1])
    return am.T @ bm


def stack_times_matrix(v: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Column ``j`` of the result is ``sum_l v[..., l] * m[l, j]``."""
    v = np.asarray(v, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != v.shape[-1]:
        raise ShapeError(f"stack has {v.shape[-1]} columns, matrix has {m.shape[0]} rows")
    return np.tensordot(v, m, axes=([-1], [0]))


def stack_times_vector(v: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Linear combination ``sum_l z[l] * v[..., l]``."""
    v = np.asarray(v, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != v.shape[-1]:
        raise ShapeError(f"stack has {v.shape[-1]} columns, vector has length {z.shape}")
    return np.tensordot(v, z, axes=([-1], [0]))


def kron_chain(mats: Sequence[np.ndarray]) -> np.ndarray:
    """``kron(mats[-1], ..., mats[0])``, the matrix acting on :func:`vec`."""
    return reduce(np.kron, [np.asarray(m, dtype=np.float64) for m in reversed(mats)])


def rel_diff(x: np.ndarray, ref: np.ndarray) -> float:
    """``||x - ref|| / max(1, ||ref||)``, the package's comparison convention."""
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    return float(np.linalg.norm(x - ref) / max(1.0, np.linalg.norm(ref)))


# -- text file format ---------------------------------------------------------


def write_tensor(path: str | os.PathLike, x: np.ndarray) -> None:
    """Write `x` as ``TENSOR N I1 ... IN`` followed by values, first index fastest."""
    x = as_tensor(x)
    header = "TENSOR " + " ".join(str(s) for s in (x.ndim,) + x.shape)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for value in vec(x):
            fh.write(f"{value:.17g}\n")


def read_tensor(path: str | os.PathLike) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        body = fh.read().split()
    if len(header) < 3 or header[0] != "TENSOR":
        raise FormatError(f"{path}: expected header 'TENSOR N I1 ... IN'")
    try:
        order = int(header[1])
        shape = tuple(int(s) for s in header[2:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed header {' '.join(header)!r}") from exc
    if order != len(shape):
        raise FormatError(f"{path}: header declares {order} modes but lists {len(shape)} extents")
    try:
        shape = check_shape(shape)
    except ShapeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        values = np.array(body, dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry") from exc
    if values.size != math.prod(shape):
        raise FormatError(f"{path}: expected {math.prod(shape)} values, found {values.size}")
    return devec(values, shape)
