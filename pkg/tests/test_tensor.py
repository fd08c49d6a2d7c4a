import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorgkb.exceptions import FormatError, ShapeError
from tensorgkb.tensor import (
    as_stack,
    contracted_product,
    dematricize,
    devec,
    inner,
    kron_chain,
    matricize,
    mode_contract_vector,
    multi_mode_product,
    n_mode_product,
    norm,
    read_tensor,
    rel_diff,
    stack_times_matrix,
    stack_times_vector,
    vec,
    write_tensor,
)


def loop_mode_product(x, u, n):
    """Elementwise definition: y[..j..] = sum_i x[..i..] u[j, i]."""
    shape = list(x.shape)
    shape[n] = u.shape[0]
    y = np.zeros(shape)
    for idx in itertools.product(*[range(s) for s in shape]):
        total = 0.0
        for i in range(x.shape[n]):
            src = list(idx)
            src[n] = i
            total += x[tuple(src)] * u[idx[n], i]
        y[idx] = total
    return y


def loop_contract(x, y, n):
    shape = x.shape[:n] + x.shape[n + 1:]
    out = np.zeros(shape)
    for idx in itertools.product(*[range(s) for s in shape]):
        for i in range(x.shape[n]):
            src = idx[:n] + (i,) + idx[n:]
            out[idx] += x[src] * y[i]
    return out


shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)


def test_mode_product_storage_order_example():
    x = devec(np.arange(1.0, 9.0), (2, 2, 2))
    u = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert x[1, 0, 0] == 2.0  # first index fastest
    np.testing.assert_array_equal(n_mode_product(x, u, 0), loop_mode_product(x, u, 0))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_mode_product_matches_loops(n):
    rng = np.random.default_rng(n)
    x = rng.standard_normal((3, 4, 2))
    u = rng.standard_normal((5, x.shape[n]))
    np.testing.assert_allclose(n_mode_product(x, u, n), loop_mode_product(x, u, n), rtol=1e-13, atol=1e-13)


def test_mode_product_identity_and_zero():
    x = np.random.default_rng(0).standard_normal((3, 2, 4))
    np.testing.assert_array_equal(n_mode_product(x, np.eye(2), 1), x)
    assert not np.any(n_mode_product(x, np.zeros((2, 2)), 1))


def test_mode_product_shape_error_names_mode():
    with pytest.raises(ShapeError, match="mode 2"):
        n_mode_product(np.zeros((2, 3, 4)), np.zeros((4, 3)), 2)


def test_mode_product_accepts_sparse():
    import scipy.sparse as sp

    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 3))
    a = sp.random(3, 3, density=0.5, random_state=2, format="csr")
    np.testing.assert_allclose(n_mode_product(x, a, 1), n_mode_product(x, a.toarray(), 1))


def test_vec_kronecker_order():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2, 3, 2))
    mats = [rng.standard_normal((s, s)) for s in x.shape]
    y = multi_mode_product(x, mats)
    np.testing.assert_allclose(vec(y), kron_chain(mats) @ vec(x), rtol=1e-13)


def test_mode1_unfolding_identity():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((2, 3, 2))
    a = [rng.standard_normal((s, s)) for s in x.shape]
    y = multi_mode_product(x, a)
    np.testing.assert_allclose(matricize(y, 0), a[0] @ matricize(x, 0) @ np.kron(a[2], a[1]).T, rtol=1e-12)


def test_matricize_order2_is_matrix():
    m = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(matricize(m, 0), m)


@settings(max_examples=50, deadline=None)
@given(shapes, st.data())
def test_matricize_roundtrip(shape, data):
    n = data.draw(st.integers(0, len(shape) - 1))
    x = np.random.default_rng(len(shape)).standard_normal(shape)
    np.testing.assert_array_equal(dematricize(matricize(x, n), n, shape), x)
    np.testing.assert_array_equal(devec(vec(x), shape), x)


@settings(max_examples=40, deadline=None)
@given(shapes, st.data(), st.integers(0, 2**31))
def test_contraction_lemma(shape, data, seed):
    n = data.draw(st.integers(0, len(shape) - 1))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    a = rng.standard_normal((3, shape[n]))
    y = rng.standard_normal(3)
    lhs = mode_contract_vector(n_mode_product(x, a, n), y, n)
    rhs = mode_contract_vector(x, a.T @ y, n)
    assert rel_diff(lhs, rhs) <= 1e-13


def test_contract_vector_examples():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((3, 4, 2))
    e = np.zeros(4)
    e[2] = 1.0
    np.testing.assert_array_equal(mode_contract_vector(x, e, 1), x[:, 2, :])
    assert not np.any(mode_contract_vector(x, np.zeros(4), 1))
    y = rng.standard_normal(2)
    np.testing.assert_allclose(mode_contract_vector(x, y, 2), loop_contract(x, y, 2), rtol=1e-13)
    with pytest.raises(ShapeError):
        mode_contract_vector(x, np.zeros(3), 1)


def test_contracted_product_examples():
    a = np.eye(2)
    b = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(contracted_product(a, b), b)
    x = np.array([[1.0, 3.0], [2.0, 4.0]])
    assert contracted_product(as_stack([x]), as_stack([x]))[0, 0] == 30.0
    q, _ = np.linalg.qr(np.random.default_rng(6).standard_normal((12, 4)))
    np.testing.assert_allclose(contracted_product(q.reshape(3, 4, 4), q.reshape(3, 4, 4)), np.eye(4), atol=1e-14)
    with pytest.raises(ShapeError):
        contracted_product(np.zeros((2, 3, 2)), np.zeros((3, 2, 2)))


def test_contracted_product_recursive_trace_definition():
    """Full inner product agrees with the recursive trace definition for N = 2, 3."""
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 4, 2, 5))
    b = rng.standard_normal((3, 4, 2, 6))
    ref = np.empty((5, 6))
    for i in range(5):
        for j in range(6):
            ref[i, j] = np.trace(np.stack([a[..., k, i].T @ b[..., k, j] for k in range(2)]).sum(0))
    np.testing.assert_allclose(contracted_product(a, b), ref, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(shapes, st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_stack_proposition(shape, m, p, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(shape + (p,))
    b = rng.standard_normal(shape + (m,))
    z = rng.standard_normal(m)
    lhs = contracted_product(a, stack_times_vector(b, z)[..., None])[:, 0]
    rhs = contracted_product(a, b) @ z
    assert rel_diff(lhs, rhs) <= 1e-13


def test_stack_times_examples():
    rng = np.random.default_rng(8)
    v = rng.standard_normal((3, 2, 4))
    np.testing.assert_array_equal(stack_times_matrix(v, np.eye(4)), v)
    e = np.zeros(4)
    e[1] = 1.0
    np.testing.assert_array_equal(stack_times_vector(v, e), v[..., 1])
    with pytest.raises(ShapeError):
        stack_times_matrix(v, np.eye(3))


def test_inner_norm():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((3, 4))
    assert inner(x, x) == pytest.approx(norm(x) ** 2, rel=1e-15)
    assert inner(x, np.zeros_like(x)) == 0.0
    assert norm(x) == pytest.approx(np.linalg.norm(vec(x)), rel=1e-15)
    assert norm(x) ** 2 == pytest.approx(np.trace(contracted_product(x[..., None], x[..., None])), rel=1e-15)
    with pytest.raises(ShapeError):
        inner(x, x.T)


def test_modes_commute():
    rng = np.random.default_rng(10)
    x = rng.standard_normal((3, 4, 2))
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((4, 4))
    lhs = n_mode_product(n_mode_product(x, a, 0), b, 1)
    rhs = n_mode_product(n_mode_product(x, b, 1), a, 0)
    assert rel_diff(lhs, rhs) <= 1e-13


def test_text_roundtrip(tmp_path):
    x = np.random.default_rng(11).standard_normal((3, 2, 2))
    path = tmp_path / "x.tensor"
    write_tensor(path, x)
    assert path.read_text().splitlines()[0] == "TENSOR 3 3 2 2"
    np.testing.assert_array_equal(read_tensor(path), x)


@pytest.mark.parametrize(
    "text",
    ["MATRIX 2 2 2\n1\n2\n3\n4\n", "TENSOR 2 2 2\n1\n2\n3\n", "TENSOR 3 2 2\n1\n2\n3\n4\n", "TENSOR 1 2\n1\nx\n"],
)
def test_text_format_errors(tmp_path, text):
    path = tmp_path / "bad.tensor"
    path.write_text(text)
    with pytest.raises(FormatError):
        read_tensor(path)


def test_bad_shapes():
    with pytest.raises(ShapeError):
        devec(np.zeros(5), (2, 3))
    with pytest.raises(ShapeError):
        matricize(np.zeros((2, 2)), 2)
