"""Reverse-mode autodiff correctness against finite differences."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psd.autodiff import Tensor, concat_cols, norm_rows


def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        hi = f(x)
        x[idx] = orig - h
        lo = f(x)
        x[idx] = orig
        g[idx] = (hi - lo) / (2 * h)
        it.iternext()
    return g


def check_unary(op, x, tol=1e-6):
    t = Tensor(x.copy(), requires_grad=True)
    loss = op(t).sum()
    loss.backward()
    num = numeric_grad(lambda v: float(op(Tensor(v)).sum().data), x.copy())
    assert np.allclose(t.grad, num, atol=tol), (op, t.grad, num)


def test_elementwise_ops_match_finite_differences():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 4))
    check_unary(lambda t: t.tanh(), x)
    check_unary(lambda t: t.exp(), x)
    check_unary(lambda t: (t * t).sqrt(), x)
    check_unary(lambda t: (t * t + 0.5).log(), x)
    check_unary(lambda t: t * 2.0 - t**3, x)
    check_unary(lambda t: t / 3.0 + 1.0 / (t * t + 1.0), x)


def test_relu_gradient_is_mask():
    x = np.array([[-1.0, 0.5, 2.0]])
    t = Tensor(x, requires_grad=True)
    t.relu().sum().backward()
    assert np.array_equal(t.grad, [[0.0, 1.0, 1.0]])


def test_matmul_gradients():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((4, 3))
    b = rng.standard_normal((3, 2))
    ta = Tensor(a.copy(), requires_grad=True)
    tb = Tensor(b.copy(), requires_grad=True)
    (ta @ tb).sum().backward()
    assert np.allclose(ta.grad, np.ones((4, 2)) @ b.T)
    assert np.allclose(tb.grad, a.T @ np.ones((4, 2)))


def test_broadcast_add_unbroadcasts_grad():
    a = Tensor(np.zeros((5, 3)), requires_grad=True)
    b = Tensor(np.zeros((1, 3)), requires_grad=True)
    (a + b).sum().backward()
    assert a.grad.shape == (5, 3)
    assert b.grad.shape == (1, 3)
    assert np.allclose(b.grad, 5.0)


def test_minimum_maximum_clip_gradients():
    x = np.array([-2.0, -0.5, 0.5, 2.0])
    t = Tensor(x.copy(), requires_grad=True)
    t.minimum(1.0).sum().backward()
    assert np.array_equal(t.grad, [1.0, 1.0, 1.0, 0.0])

    t = Tensor(x.copy(), requires_grad=True)
    t.maximum(0.0).sum().backward()
    assert np.array_equal(t.grad, [0.0, 0.0, 1.0, 1.0])

    t = Tensor(x.copy(), requires_grad=True)
    t.clip(-1.0, 1.0).sum().backward()
    assert np.array_equal(t.grad, [0.0, 1.0, 1.0, 0.0])


def test_mean_axis_keepdims():
    x = np.arange(12, dtype=np.float64).reshape(3, 4)
    t = Tensor(x, requires_grad=True)
    m = t.mean(axis=1, keepdims=True)
    assert m.shape == (3, 1)
    m.sum().backward()
    assert np.allclose(t.grad, 0.25)


def test_cols_slice_grad_routes_to_columns():
    x = np.ones((2, 5))
    t = Tensor(x, requires_grad=True)
    t.cols(1, 3).sum().backward()
    expect = np.zeros((2, 5))
    expect[:, 1:3] = 1.0
    assert np.array_equal(t.grad, expect)


def test_concat_cols_splits_gradient():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    b = Tensor(np.ones((2, 3)), requires_grad=True)
    out = concat_cols([a, b])
    assert out.shape == (2, 5)
    (out * Tensor(np.arange(10.0).reshape(2, 5))).sum().backward()
    assert np.array_equal(a.grad, [[0.0, 1.0], [5.0, 6.0]])
    assert np.array_equal(b.grad, [[2.0, 3.0, 4.0], [7.0, 8.0, 9.0]])


def test_norm_rows_matches_finite_differences():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((4, 3))
    t = Tensor(x.copy(), requires_grad=True)
    norm_rows(t).sum().backward()
    num = numeric_grad(lambda v: float(norm_rows(Tensor(v)).sum().data), x.copy())
    assert np.allclose(t.grad, num, atol=1e-6)


def test_reused_node_accumulates_gradient():
    # y = x*x + x; dy/dx = 2x + 1, exercised through a shared subgraph
    t = Tensor(np.array([3.0]), requires_grad=True)
    (t * t + t).sum().backward()
    assert np.allclose(t.grad, [7.0])


def test_detach_blocks_gradient():
    t = Tensor(np.array([2.0]), requires_grad=True)
    (t * t.detach()).sum().backward()
    assert np.allclose(t.grad, [2.0])  # only the live factor contributes


@settings(max_examples=50, deadline=None)
@given(
    rows=st.integers(1, 6),
    cols=st.integers(1, 5),
    seed=st.integers(0, 10_000),
)
def test_composite_expression_grad_property(rows, cols, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((rows, cols))

    def expr(t):
        return ((t.tanh() * 0.7 + (t * t)).mean(axis=0) ** 2).sum()

    t = Tensor(x.copy(), requires_grad=True)
    expr(t).backward()
    num = numeric_grad(lambda v: float(expr(Tensor(v)).data), x.copy())
    assert np.allclose(t.grad, num, atol=1e-5)


def test_backward_requires_scalar():
    t = Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(ValueError):
        (t * 2.0).backward()
