# %% [markdown]
# # Tensors, mode products and stacks
#
# Tensors are plain float64 arrays. Modes are numbered from 0, and `vec`
# stacks entries in column-major order so that mode products turn into
# Kronecker products acting on `vec(X)`.

# %%
import numpy as np

from tensorgkb import tensor as tg

rng = np.random.default_rng(0)
x = rng.standard_normal((4, 3, 2))
a = [rng.standard_normal((n, n)) for n in x.shape]

# %% [markdown]
# `multi_mode_product` applies one matrix per mode. The same map, written as
# one big matrix, is `kron(A2, A1, A0)`.

# %%
y = tg.multi_mode_product(x, a)
big = tg.kron_chain(a)
print("mode products vs Kronecker:", np.linalg.norm(tg.vec(y) - big @ tg.vec(x)))

# %% [markdown]
# Contracting a mode with a vector after a mode product is the same as
# contracting with the transformed vector.

# %%
v = rng.standard_normal(3)
lhs = tg.mode_contract_vector(tg.n_mode_product(x, a[1], 1), v, 1)
rhs = tg.mode_contract_vector(x, a[1].T @ v, 1)
print("contraction identity:", tg.rel_diff(lhs, rhs))

# %% [markdown]
# A stack keeps several tensors of one shape along a trailing mode. The
# contracted product of two stacks is their matrix of inner products.

# %%
s = tg.as_stack([x, 2 * x, rng.standard_normal(x.shape)])
gram = tg.contracted_product(s, s)
print("Gram matrix of the stack:\n", np.round(gram, 3))
print("norm^2 of the first column:", tg.norm(x) ** 2)
