"""Batch command-line front end.

Subcommands: ``solve``, ``deblur``, ``cond`` and ``bench``. Every run can be
described by a UTF-8 ``key = value`` file passed with ``--config``; flags given
on the command line override the file.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (for
example no discrepancy certificate by ``kmax``), 4 I/O error.

Coefficient sources are file paths (MatrixMarket ``.mtx`` or the tensor text
format) or generator strings::

    collocation:N[:L]        gaussian:N:R[:SIGMA]        uniform:N:R
"""

from __future__ import annotations

import argparse
import math
import os
import runpy
import sys
import time
import warnings
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .conditioning import cond_report
from .exceptions import (
    ConvergenceError,
    FormatError,
    NeedsLargerKError,
    NoSolutionError,
    SingularityError,
)
from .imaging import (
    BlurSpec,
    NoiseSpec,
    SingularBlurWarning,
    add_noise,
    blur_matrix,
    build_blur_problem,
    collocation_matrix,
    read_ppm,
    relative_error,
    synthetic_image,
    write_metrics_csv,
    write_ppm,
)
from .operators import SteinOperator, SylvesterOperator, load_matrix, make_matrix_free
from .regularization import DiscrepancyConfig, algorithm3, algorithm4, write_report_csv
from .tensor import read_tensor, write_tensor

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

BENCH_COLUMNS = ["grid", "noise", "method", "iter", "e_k", "cpu_seconds"]


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    problem: str = "stein"
    coefficients: list = field(default_factory=list)
    script: Optional[str] = None
    rhs: Optional[str] = None
    exact: Optional[str] = None
    epsilon: Optional[float] = None
    noise: float = 0.01
    seed: int = 0
    algorithm: str = "alg3"
    eta: float = 1.01
    tau: Optional[float] = None
    kmax: int = 200
    stop_rule: str = "discrepancy"
    out_dir: str = "."
    emit_images: bool = False
    image: str = "synthetic:64x64"
    blur: list = field(default_factory=lambda: ["gaussian:7:2", "uniform:2", "uniform:2"])
    example: str = "collocation"
    grids: list = field(default_factory=lambda: ["16", "32"])
    noises: list = field(default_factory=lambda: [0.01, 0.001])
    methods: list = field(default_factory=lambda: ["alg3", "alg4"])
    max_dim: int = 4096

    def validate(self, command: str) -> "RunConfig":
        if self.problem not in ("sylvester", "stein", "script"):
            raise ConfigError(f"problem must be sylvester, stein or script, not {self.problem!r}")
        if self.algorithm not in ("alg3", "alg4"):
            raise ConfigError(f"algorithm must be alg3 or alg4, not {self.algorithm!r}")
        for m in self.methods:
            if m not in ("alg3", "alg4"):
                raise ConfigError(f"unknown method {m!r}")
        if self.stop_rule not in ("discrepancy", "relative_change"):
            raise ConfigError(f"stop_rule must be discrepancy or relative_change, not {self.stop_rule!r}")
        if self.stop_rule == "relative_change" and self.tau is None:
            raise ConfigError("stop_rule relative_change needs tau")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be > 0")
        if not self.eta > 1:
            raise ConfigError("eta must be > 1")
        if self.kmax < 2:
            raise ConfigError("kmax must be >= 2")
        if not self.noise >= 0 or any(not v >= 0 for v in self.noises):
            raise ConfigError("noise levels must be >= 0")
        if command == "solve":
            if (self.rhs is None) == (self.exact is None):
                raise ConfigError("give exactly one of rhs and exact")
            if self.rhs is not None and self.epsilon is None:
                raise ConfigError("a given rhs needs its noise norm: set epsilon")
            if self.problem == "script":
                if not self.script:
                    raise ConfigError("problem script needs a script path")
            elif not self.coefficients:
                raise ConfigError("no coefficients given")
        if command == "cond" and not self.coefficients:
            raise ConfigError("no coefficients given")
        if command == "bench" and self.example not in ("collocation", "deblur"):
            raise ConfigError(f"example must be collocation or deblur, not {self.example!r}")
        return self


_LIST_KEYS = {"coefficients", "blur", "grids", "methods"}
_FLOAT_LIST_KEYS = {"noises"}


def _convert(key: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if key not in kinds:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    try:
        if key in _LIST_KEYS:
            return [s.strip() for s in raw.split(",") if s.strip()]
        if key in _FLOAT_LIST_KEYS:
            return [float(s) for s in raw.split(",") if s.strip()]
        kind = kinds[key]
        if "bool" in kind:
            if raw.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("1", "true", "yes")
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            out[key] = _convert(key, value)
    return out


def build_config(args: argparse.Namespace, command: str) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    for key in [f.name for f in fields(RunConfig)]:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag) if isinstance(flag, str) else flag
    return RunConfig(**values).validate(command)


# -- problem assembly ---------------------------------------------------------


def coefficient_from_source(source: str):
    """Matrix from a file path or a generator string (see the module docstring)."""
    parts = source.split(":")
    try:
        if parts[0] == "collocation" and len(parts) in (2, 3):
            return collocation_matrix(int(parts[1]), float(parts[2]) if len(parts) == 3 else 300.0)
        if parts[0] == "gaussian" and len(parts) in (3, 4):
            sigma = float(parts[3]) if len(parts) == 4 else 2.0
            return blur_matrix(BlurSpec("gaussian", int(parts[1]), int(parts[2]), sigma))
        if parts[0] == "uniform" and len(parts) == 3:
            return blur_matrix(BlurSpec("uniform", int(parts[1]), int(parts[2])))
    except ValueError as exc:
        raise ConfigError(f"bad coefficient generator {source!r}: {exc}") from exc
    if parts[0] in ("collocation", "gaussian", "uniform"):
        raise ConfigError(f"bad coefficient generator {source!r}")
    if not os.path.isfile(source):
        raise FileNotFoundError(f"coefficient file not found: {source}")
    return load_matrix(source)


def blur_spec(text: str, n: int) -> BlurSpec:
    """``gaussian:R[:SIGMA]`` or ``uniform:R`` for a mode of extent `n`."""
    parts = text.split(":")
    try:
        if parts[0] == "gaussian" and len(parts) in (2, 3):
            return BlurSpec("gaussian", n, int(parts[1]), float(parts[2]) if len(parts) == 3 else 2.0)
        if parts[0] == "uniform" and len(parts) == 2:
            return BlurSpec("uniform", n, int(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"bad blur {text!r}: {exc}") from exc
    raise ConfigError(f"bad blur {text!r}")


def load_image(source: str) -> np.ndarray:
    """PPM path or ``synthetic:HxW``."""
    if source.startswith("synthetic"):
        size = source.partition(":")[2] or "64x64"
        try:
            h, w = (int(s) for s in size.lower().split("x"))
        except ValueError as exc:
            raise ConfigError(f"bad synthetic image size {size!r}") from exc
        return synthetic_image(h, w)
    return read_ppm(source)


def build_operator(cfg: RunConfig, shape_hint=None):
    if cfg.problem == "script":
        ns = runpy.run_path(cfg.script)
        missing = [k for k in ("shape", "apply", "adjoint") if k not in ns]
        if missing:
            raise ConfigError(f"{cfg.script}: missing {', '.join(missing)}")
        return make_matrix_free(ns["shape"], ns["apply"], ns["adjoint"])
    mats = [coefficient_from_source(s) for s in cfg.coefficients]
    return SylvesterOperator(mats) if cfg.problem == "sylvester" else SteinOperator(mats)


def _exact_solution(cfg: RunConfig, shape) -> np.ndarray:
    if cfg.exact == "random":
        return np.random.default_rng(cfg.seed).standard_normal(shape)
    x = read_tensor(cfg.exact)
    if x.shape != tuple(shape):
        raise ConfigError(f"exact solution has shape {x.shape}, operator acts on {tuple(shape)}")
    return x


def _run(op, rhs, eps, cfg: RunConfig, method: str, x_ref=None):
    if not eps > 0:
        raise ConfigError("the noise norm is zero; the discrepancy principle needs noise > 0")
    config = DiscrepancyConfig(eps, eta=cfg.eta, k_max=cfg.kmax)
    alg = algorithm3 if method == "alg3" else algorithm4
    t0 = time.perf_counter()
    sol = alg(op, rhs, config, x_ref=x_ref, stop_rule=cfg.stop_rule, tau=cfg.tau)
    return sol, time.perf_counter() - t0


def _summary(sol, seconds: float, eps: float, e_k: Optional[float]) -> str:
    lines = [
        f"iterations     {sol.k}",
        f"stop reason    {sol.stop_reason}",
        f"mu             {sol.mu:.6e}",
        f"residual       {sol.residual_norm:.6e}",
        f"epsilon        {eps:.6e}",
        f"residual/eps   {sol.residual_norm / eps:.6f}",
    ]
    if e_k is not None:
        lines.append(f"e_k            {e_k:.6e}")
    lines.append(f"wall seconds   {seconds:.3f}  (not reproducible)")
    return "\n".join(lines) + "\n"


def _check_certificate(sol, cfg: RunConfig) -> None:
    if cfg.stop_rule == "discrepancy" and sol.stop_reason != "discrepancy":
        raise NumericalFailure(f"no discrepancy certificate (stopped on {sol.stop_reason} at k={sol.k})")


# -- commands -----------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    op = build_operator(cfg)
    x_ref = None
    if cfg.exact is not None:
        x_ref = _exact_solution(cfg, op.shape)
        rhs, eps = add_noise(op.apply(x_ref), NoiseSpec(cfg.noise, cfg.seed))
    else:
        rhs = read_tensor(cfg.rhs)
        eps = cfg.epsilon
    sol, seconds = _run(op, rhs, eps, cfg, cfg.algorithm, x_ref)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_tensor(os.path.join(cfg.out_dir, "solution.tensor"), sol.x)
    write_report_csv(sol, os.path.join(cfg.out_dir, "metrics.csv"))
    e_k = relative_error(sol.x, x_ref) if x_ref is not None else None
    text = _summary(sol, seconds, eps, e_k)
    with open(os.path.join(cfg.out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    _check_certificate(sol, cfg)
    return EXIT_OK


def cmd_deblur(cfg: RunConfig) -> int:
    x = load_image(cfg.image)
    if len(cfg.blur) != x.ndim:
        raise ConfigError(f"need {x.ndim} blur entries, got {len(cfg.blur)}")
    specs = [blur_spec(b, n) for b, n in zip(cfg.blur, x.shape)]
    kind = "sylvester" if cfg.problem == "sylvester" else "stein"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularBlurWarning)
        op, rhs = build_blur_problem(kind, specs, x)
    noisy, eps = add_noise(rhs, NoiseSpec(cfg.noise, cfg.seed))
    sol, seconds = _run(op, noisy, eps, cfg, cfg.algorithm, x)
    e_k = relative_error(sol.x, x)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_report_csv(sol, os.path.join(cfg.out_dir, "metrics.csv"))
    text = _summary(sol, seconds, eps, e_k)
    text += f"input e        {relative_error(noisy, x):.6e}\n"
    with open(os.path.join(cfg.out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    if cfg.emit_images and x.ndim == 3 and x.shape[2] == 3:
        write_ppm(os.path.join(cfg.out_dir, "exact.ppm"), x)
        write_ppm(os.path.join(cfg.out_dir, "observed.ppm"), noisy)
        write_ppm(os.path.join(cfg.out_dir, "restored.ppm"), sol.x)
    _check_certificate(sol, cfg)
    return EXIT_OK


def cmd_cond(cfg: RunConfig) -> int:
    with warnings.catch_warnings():
        # singular coefficients are flagged in the report itself
        warnings.simplefilter("ignore", SingularBlurWarning)
        mats = [coefficient_from_source(s) for s in cfg.coefficients]
    mats = [m.toarray() if hasattr(m, "toarray") else m for m in mats]
    rows = cond_report(mats, cfg.max_dim)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_metrics_csv(os.path.join(cfg.out_dir, "cond.csv"), rows, ["bound", "kind", "status", "value", "note"])
    width = max(len(r["bound"]) for r in rows)
    for r in rows:
        value = "" if math.isnan(r["value"]) else f"{r['value']:.6e}"
        sys.stdout.write(f"{r['bound']:<{width}}  {r['kind']:<11} {r['status']:<8} {value:<13} {r['note']}\n")
    return EXIT_OK


def _bench_problem(cfg: RunConfig, grid: str, noise: float, seed: int):
    if cfg.example == "collocation":
        n = int(grid)
        a = collocation_matrix(n)
        op = SylvesterOperator([a, a, a])
        x = np.random.default_rng(seed).standard_normal((n, n, n))
        rhs = op.apply(x)
    else:
        x = load_image(grid if grid.startswith("synthetic") or os.path.exists(grid) else f"synthetic:{grid}")
        specs = [blur_spec(b, n) for b, n in zip(cfg.blur, x.shape)]
        kind = "sylvester" if cfg.problem == "sylvester" else "stein"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SingularBlurWarning)
            op, rhs = build_blur_problem(kind, specs, x)
    noisy, eps = add_noise(rhs, NoiseSpec(noise, seed))
    return op, noisy, eps, x


def cmd_bench(cfg: RunConfig) -> int:
    rows = []
    cell = 0
    for grid in cfg.grids:
        for noise in cfg.noises:
            # one seed per (grid, noise) cell so the methods see the same data
            op, rhs, eps, x = _bench_problem(cfg, grid, noise, cfg.seed + cell)
            cell += 1
            for method in cfg.methods:
                sol, seconds = _run(op, rhs, eps, cfg, method, x)
                rows.append({
                    "grid": grid, "noise": noise, "method": method, "iter": sol.k,
                    "e_k": relative_error(sol.x, x), "cpu_seconds": f"{seconds:.3f}",
                })
                sys.stdout.write(f"{grid:>10} {noise:<8g} {method} k={sol.k:<4} e_k={rows[-1]['e_k']:.3e}"
                                 f" {sol.stop_reason} {seconds:.2f}s\n")
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_metrics_csv(os.path.join(cfg.out_dir, "bench.csv"), rows, BENCH_COLUMNS)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "deblur": cmd_deblur, "cond": cmd_cond, "bench": cmd_bench}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensorgkb", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="key = value file; flags override it")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--noise", type=float, help="relative noise level")
    shared.add_argument("--eta", type=float, help="discrepancy safety factor (default 1.01)")
    shared.add_argument("--tau", type=float, help="relative-change tolerance")
    shared.add_argument("--kmax", type=int)
    shared.add_argument("--algorithm", choices=["alg3", "alg4"])
    shared.add_argument("--out-dir", dest="out_dir")
    shared.add_argument("--emit-images", dest="emit_images", action="store_const", const=True)
    shared.add_argument("--problem", choices=["sylvester", "stein", "script"])
    shared.add_argument("--stop-rule", dest="stop_rule", choices=["discrepancy", "relative_change"])
    shared.add_argument("--coefficients", help="comma-separated coefficient sources")

    p = sub.add_parser("solve", parents=[shared], help="solve one tensor equation")
    p.add_argument("--script", help="Python file defining shape, apply and adjoint")
    p.add_argument("--rhs", help="right-hand side tensor file (needs --epsilon)")
    p.add_argument("--exact", help="exact solution tensor file, or 'random'")
    p.add_argument("--epsilon", type=float, help="noise norm of a given rhs")

    p = sub.add_parser("deblur", parents=[shared], help="blur, perturb and restore an image")
    p.add_argument("--image", help="PPM file or synthetic:HxW")
    p.add_argument("--blur", help="one blur per mode, e.g. gaussian:7:2,uniform:2,uniform:2")

    p = sub.add_parser("cond", parents=[shared], help="condition-number bounds for a Stein matrix")
    p.add_argument("--max-dim", dest="max_dim", type=int, help="largest matrix the oracle may build")

    p = sub.add_parser("bench", parents=[shared], help="table of iterations and errors")
    p.add_argument("--example", choices=["collocation", "deblur"])
    p.add_argument("--grids", help="comma list: n for collocation, HxW for deblur")
    p.add_argument("--noises", help="comma list of noise levels")
    p.add_argument("--methods", help="comma list of alg3, alg4")
    p.add_argument("--blur")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args, args.command)
        return COMMANDS[args.command](cfg)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, NoSolutionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, NeedsLargerKError, ConvergenceError, SingularityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
