"""Shared test helpers: seeded coefficient families and recurrence checks."""

import numpy as np

from tensorgkb.tensor import as_stack, norm, stack_times_matrix


def gkb_identity_defects(state, op):
    """Relative defects of the two stacked recurrence identities.

    ``M(U_1..U_k) = V_1..V_{k+1} Tbar`` and ``M*(V_1..V_k) = U_1..U_k T^T``.
    """
    k = state.k
    b = state.bidiag
    w = as_stack([op.apply(state.u(j)) for j in range(1, k + 1)])
    w_star = as_stack([op.apply_adjoint(state.v(j)) for j in range(1, k + 1)])
    nv = min(k + 1, state.num_v)  # after a beta breakdown the last row of Tbar is zero
    d1 = norm(w - stack_times_matrix(state.v_basis(nv), b.Tbar[:nv])) / norm(w)
    d2 = norm(w_star - stack_times_matrix(state.u_basis(k), b.T.T)) / norm(w_star)
    return d1, d2


def orthonormality_defects(state):
    """``||B^T B - I||_F`` for the stored V and U bases."""
    vm = state.v_basis().reshape(-1, state.num_v)
    um = state.u_basis().reshape(-1, state.k)
    return (float(np.linalg.norm(vm.T @ vm - np.eye(state.num_v))),
            float(np.linalg.norm(um.T @ um - np.eye(state.k))))


# -- coefficient families that satisfy each bound's hypothesis ---------------


def _sizes(rng, n_modes):
    return [int(rng.choice([2, 3])) for _ in range(n_modes)]


def large_sigma_min(rng, n_modes):
    """Every coefficient has sigma_min > 1, so the product exceeds 1."""
    out = []
    for n in _sizes(rng, n_modes):
        q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
        q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
        out.append(q1 @ np.diag(rng.uniform(1.05, 3.0, n)) @ q2)
    return out


def generic(rng, n_modes):
    return [rng.standard_normal((n, n)) for n in _sizes(rng, n_modes)]


def positive_definite_part(rng, n_modes):
    """Symmetric parts are positive definite; the skew parts are small."""
    out = []
    for n in _sizes(rng, n_modes):
        g = rng.standard_normal((n, n))
        s = rng.standard_normal((n, n))
        out.append(g @ g.T / n + rng.uniform(0.1, 1.0) * np.eye(n) + 0.3 * (s - s.T))
    return out


def small_parts(rng, n_modes):
    """``M_S + M_H < 1`` with room for a positive gap."""
    out = []
    for n in _sizes(rng, n_modes):
        a = rng.standard_normal((n, n))
        out.append(a * rng.uniform(0.1, 0.45) / np.linalg.norm(a, 2))
    return out


def contractive(rng, n_modes):
    """Product of the operator norms below one."""
    out = []
    for n in _sizes(rng, n_modes):
        a = rng.standard_normal((n, n))
        out.append(a * rng.uniform(0.2, 0.95) / np.linalg.norm(a, 2))
    return out


def expanding_spectrum(rng, n_modes):
    """Every eigenvalue has modulus above one."""
    out = []
    for n in _sizes(rng, n_modes):
        s = rng.standard_normal((n, n)) + 2 * np.eye(n)
        lam = rng.uniform(1.1, 3.0, n) * rng.choice([-1, 1], n)
        out.append(s @ np.diag(lam) @ np.linalg.inv(s))
    return out
