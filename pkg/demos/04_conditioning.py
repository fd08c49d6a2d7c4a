# %% [markdown]
# # Condition-number bounds for a Stein matrix
#
# `cond_report` lists every bound with its hypothesis status. For small
# problems it also lists the exact value from an SVD of the explicit matrix.

# %%
import math

import numpy as np

from tensorgkb.conditioning import cond_report, matrix_cond
from tensorgkb.imaging import collocation_matrix

rng = np.random.default_rng(3)
coefs = []
for n in (3, 4, 2):
    a = rng.standard_normal((n, n))
    coefs.append(0.8 * a / np.linalg.norm(a, 2))

for row in cond_report(coefs):
    value = "" if math.isnan(row["value"]) else f"{row['value']:.4e}"
    print(f"{row['bound']:<32} {row['kind']:<11} {row['status']:<8} {value}")

# %% [markdown]
# The collocation matrices are nearly singular for even sizes and well
# conditioned for odd ones.

# %%
for n in (31, 32):
    cond, singular = matrix_cond(collocation_matrix(n))
    print(f"n={n}: cond={cond:.3e}  flagged singular: {singular}")
