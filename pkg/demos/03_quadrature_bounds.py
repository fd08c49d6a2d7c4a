# %% [markdown]
# # Gauss and Gauss-Radau bounds
#
# For a fixed `nu`, the projected residual function after `k` steps sits
# between the Gauss value (from the square `T_k`) and the Gauss-Radau value
# (from `Tbar_k`). Both tighten as `k` grows.

# %%
import numpy as np

from tensorgkb import DiscrepancyConfig, LowerBidiagonal, gauss_bound, newton_solve_nu, radau_bound

rng = np.random.default_rng(2)
full = LowerBidiagonal(rng.uniform(0.3, 2.0, 7), rng.uniform(0.3, 2.0, 8))
nu = 50.0 / np.linalg.norm(full.Tbar, 2) ** 2
exact = radau_bound(full, nu)  # the complete factorization gives the exact value
print(f"exact value {exact:.10f}")
for k in range(1, full.k):
    part = full.leading(k)
    print(f"k={k}:  {gauss_bound(part, nu):.10f}  <  exact  <  {radau_bound(part, nu):.10f}")

# %% [markdown]
# Newton's method on the Gauss value finds the `nu` whose lower bound hits
# `eps^2`. The iterates increase monotonically from zero.

# %%
eps = 0.3 * full.beta1
root, iterates = newton_solve_nu(full.leading(5), DiscrepancyConfig(eps), full_output=True)
print("iterates:", np.array2string(np.array(iterates), precision=6))
print(f"G(nu) / eps^2 = {gauss_bound(full.leading(5), root) / eps**2:.12f}")
