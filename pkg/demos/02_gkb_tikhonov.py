# %% [markdown]
# # Bidiagonalization and Tikhonov regularization on a Stein equation
#
# We blur a random 12 x 10 x 6 tensor with a Stein operator
# `X -> X - X x0 A0 x1 A1 x2 A2`, add 1 % noise and recover it with both
# discrepancy-principle drivers.

# %%
import numpy as np

from tensorgkb import DiscrepancyConfig, SteinOperator, algorithm3, algorithm4
from tensorgkb.bidiag import diagnostics, run_to
from tensorgkb.imaging import NoiseSpec, add_noise, relative_error
from tensorgkb.tensor import norm

rng = np.random.default_rng(1)
shape = (12, 10, 6)
op = SteinOperator([0.9 * rng.standard_normal((n, n)) / np.sqrt(n) for n in shape])
x_true = rng.standard_normal(shape)
f, eps = add_noise(op.apply(x_true), NoiseSpec(0.01, seed=1))

# %% [markdown]
# The bidiagonalization keeps both bases orthonormal. The defects stay at
# rounding level because every new tensor is reorthogonalized twice.

# %%
state = run_to(op, f, 20)
for row in diagnostics(state)[::5]:
    print(f"j={row['j']:2d}  alpha={row['alpha']:.3f}  beta={row['beta']:.3f}  "
          f"V defect={row['v_defect']:.1e}  U defect={row['u_defect']:.1e}")

# %% [markdown]
# Both drivers stop with the residual between `eps` and `1.01 eps`.

# %%
for alg in (algorithm3, algorithm4):
    sol = alg(op, f, DiscrepancyConfig(eps), x_ref=x_true)
    r = norm(op.apply(sol.x) - f)
    print(f"{alg.__name__}: k={sol.k}  mu={sol.mu:.3e}  residual/eps={r / eps:.5f}  "
          f"e_k={relative_error(sol.x, x_true):.3e}")
