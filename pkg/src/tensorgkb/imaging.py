"""Blur operators, noise, error metrics and PPM image I/O for deblurring runs.

Noise is drawn from :func:`numpy.random.default_rng` (the PCG64 bit generator),
so a given seed gives the same perturbation on every platform.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import FormatError, SingularityError
from .operators import SteinOperator, SylvesterOperator
from .tensor import norm

__all__ = [
    "BlurSpec",
    "NoiseSpec",
    "SingularBlurWarning",
    "gaussian_toeplitz",
    "uniform_toeplitz",
    "blur_matrix",
    "collocation_matrix",
    "add_noise",
    "relative_error",
    "synthetic_image",
    "read_ppm",
    "write_ppm",
    "build_blur_problem",
    "write_metrics_csv",
]


class SingularBlurWarning(UserWarning):
    """The requested band covers the whole matrix and the result is singular."""


@dataclass(frozen=True)
class BlurSpec:
    """One-dimensional blur: ``kind`` is ``"gaussian"`` or ``"uniform"``."""

    kind: str
    n: int
    r: int
    sigma: float = 2.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown blur kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.r < 1 and not (self.kind == "gaussian" and self.r == 0):
            raise ValueError("r must be >= 1")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError("sigma must be > 0")


@dataclass(frozen=True)
class NoiseSpec:
    level: float
    seed: int = 0

    def __post_init__(self):
        if not self.level >= 0:
            raise ValueError("noise level must be >= 0")


def _band(n: int, r: int, values) -> np.ndarray:
    i, j = np.indices((n, n))
    d = np.abs(i - j)
    return np.where(d <= r, values(d), 0.0)


def gaussian_toeplitz(spec: BlurSpec) -> np.ndarray:
    """``a_ij = exp(-(i-j)^2 / (2 sigma^2)) / (sigma sqrt(2 pi))`` for ``|i-j| <= r``."""
    s = spec.sigma
    return _band(spec.n, spec.r, lambda d: np.exp(-(d.astype(float) ** 2) / (2 * s * s)) / (s * math.sqrt(2 * math.pi)))


def uniform_toeplitz(spec: BlurSpec) -> np.ndarray:
    """``b_ij = 1 / (2r - 1)`` for ``|i-j| <= r``.

    Warns with :class:`SingularBlurWarning` when ``r >= n - 1``: every entry
    is then equal and the matrix has rank one.
    """
    if spec.n > 1 and spec.r >= spec.n - 1:
        warnings.warn(f"uniform blur with r={spec.r} fills a {spec.n}x{spec.n} matrix; it is singular",
                      SingularBlurWarning, stacklevel=2)
    return _band(spec.n, spec.r, lambda d: np.full(d.shape, 1.0 / (2 * spec.r - 1)))


def blur_matrix(spec: BlurSpec) -> np.ndarray:
    return gaussian_toeplitz(spec) if spec.kind == "gaussian" else uniform_toeplitz(spec)


def collocation_matrix(n: int, L: float = 300.0) -> np.ndarray:
    """Full, severely ill-conditioned (for even `n`) collocation matrix.

    With ``x_i = 2 pi (i-1)/n`` and ``xi_j = (j-1) L/n``::

        a_ij = -2 (pi/L)^2 (-1)^(i+j) / sin^2((2 pi xi_j / L - x_i) / 2),  i != j
        a_ii = -(pi/L)^2 (n^2 + 2) / 3

    Raises
    ------
    SingularityError
        An off-diagonal ``sin`` denominator is exactly zero.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(1, n + 1)
    x = 2 * math.pi * (i - 1) / n
    xi = (i - 1) * L / n
    c2 = (math.pi / L) ** 2
    s2 = np.sin(0.5 * (2 * math.pi * xi[None, :] / L - x[:, None])) ** 2
    off = ~np.eye(n, dtype=bool)
    if np.any(s2[off] == 0):
        raise SingularityError("zero denominator in an off-diagonal collocation entry")
    sign = np.where((i[:, None] + i[None, :]) % 2 == 0, 1.0, -1.0)
    a = np.zeros((n, n))
    a[off] = -2 * c2 * sign[off] / s2[off]
    a[~off] = -c2 * (n * n + 2) / 3
    return a


def add_noise(d: np.ndarray, spec: NoiseSpec) -> tuple[np.ndarray, float]:
    """Return ``d + E`` and ``eps = ||E|| = level * ||d||``.

    ``E`` is a standard-normal draw rescaled to the requested norm.
    """
    d = np.asarray(d, dtype=np.float64)
    if spec.level == 0:
        return d.copy(), 0.0
    g = np.random.default_rng(spec.seed).standard_normal(d.shape)
    eps = spec.level * norm(d)
    e = g * (eps / norm(g))
    return d + e, eps


def relative_error(x: np.ndarray, x_ref: np.ndarray) -> float:
    """``||x - x_ref|| / ||x_ref||``."""
    x = np.asarray(x, dtype=np.float64)
    x_ref = np.asarray(x_ref, dtype=np.float64)
    if x.shape != x_ref.shape:
        raise ValueError(f"shapes differ: {x.shape} vs {x_ref.shape}")
    ref = norm(x_ref)
    if ref == 0:
        raise ValueError("reference tensor is zero")
    return norm(x - x_ref) / ref


def synthetic_image(h: int = 64, w: int = 64) -> np.ndarray:
    """Deterministic ``h x w x 3`` test picture in [0, 1]: smooth shading, a box and a disc."""
    if h < 2 or w < 2:
        raise ValueError("image must be at least 2 x 2")
    yy, xx = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")
    red = 0.5 + 0.4 * np.sin(3 * xx) * np.cos(2 * yy)
    green = 0.15 + 0.7 * ((xx > 0.3) & (xx < 0.8) & (yy > 0.2) & (yy < 0.7))
    blue = 0.2 + 0.6 * ((xx - 0.45) ** 2 + (yy - 0.55) ** 2 < 0.08)
    return np.stack([red, green, blue], axis=-1)


# -- PPM ----------------------------------------------------------------------


def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read `count` whitespace-separated header tokens, skipping comments."""
    out, pos = [], 0
    while len(out) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise FormatError("truncated PPM header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        out.append(data[start:pos])
    return out, pos + 1  # exactly one whitespace byte ends the header


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary (P6) PPM with maxval 255 as an ``h x w x 3`` array in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    tok, pos = _tokens(data, 4)
    if tok[0] != b"P6":
        raise FormatError(f"{path}: not a binary PPM (magic {tok[0]!r})")
    try:
        w, h, maxval = (int(t) for t in tok[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PPM header") from exc
    if maxval != 255:
        raise FormatError(f"{path}: maxval {maxval} is not supported (need 255)")
    if w < 1 or h < 1:
        raise FormatError(f"{path}: bad image size {w}x{h}")
    need = w * h * 3
    pixels = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos) if len(data) - pos >= need else None
    if pixels is None:
        raise FormatError(f"{path}: expected {need} pixel bytes, found {len(data) - pos}")
    return pixels.reshape(h, w, 3).astype(np.float64) / 255.0


def write_ppm(path: str | os.PathLike, image: np.ndarray) -> None:
    """Write an ``h x w x 3`` array as P6; values are clamped to [0, 1] and rounded."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"need an h x w x 3 image, got shape {image.shape}")
    q = np.rint(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(q.tobytes())


# -- problems -----------------------------------------------------------------


def build_blur_problem(kind: str, specs: Sequence, x_exact: np.ndarray):
    """Blur operator from one spec (or explicit matrix) per mode, and ``rhs = op(x_exact)``.

    `kind` is ``"sylvester"`` (sum of mode blurs) or ``"stein"``
    (``X - X x_0 A_0 x_1 A_1 ...``). Banded blurs are stored sparse.
    """
    x_exact = np.asarray(x_exact, dtype=np.float64)
    if len(specs) != x_exact.ndim:
        raise ValueError(f"{len(specs)} blur specs for a {x_exact.ndim}-mode tensor")
    mats = []
    for n, s in enumerate(specs):
        m = blur_matrix(s) if isinstance(s, BlurSpec) else s
        if m.shape != (x_exact.shape[n], x_exact.shape[n]):
            raise ValueError(f"mode {n}: blur of shape {m.shape} for extent {x_exact.shape[n]}")
        if not sp.issparse(m) and np.count_nonzero(m) < 0.25 * m.size:
            m = sp.csr_array(m)
        mats.append(m)
    if kind == "sylvester":
        op = SylvesterOperator(mats)
    elif kind == "stein":
        op = SteinOperator(mats)
    else:
        raise ValueError(f"unknown problem kind {kind!r}")
    return op, op.apply(x_exact)


def write_metrics_csv(path: str | os.PathLike, rows: Sequence[dict], columns: Sequence[str]) -> None:
    """CSV with fixed columns; floats are written with 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)
