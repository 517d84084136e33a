import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molebm import autodiff as ad
from oracles import finite_difference_grad, max_rel_err, mp_log_softmax_nll

LINEAR_TOL = 1e-6
NONLINEAR_TOL = 1e-4


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------- matmul

def test_matmul_identity():
    eye = np.eye(2)
    out = ad.matmul(ad.constant(eye), ad.constant(eye))
    np.testing.assert_array_equal(out.value, eye)


def test_matmul_hand_case():
    a = ad.constant([[1.0, 2.0], [3.0, 4.0]])
    b = ad.constant([[1.0], [1.0]])
    np.testing.assert_array_equal(ad.matmul(a, b).value, [[3.0], [7.0]])


def test_matmul_shape_mismatch():
    with pytest.raises(ad.ShapeError):
        ad.matmul(ad.constant(np.ones((2, 3))), ad.constant(np.ones((2, 3))))


def test_matmul_gradient_vs_finite_differences():
    r = rng(1)
    av = r.uniform(-2, 2, (5, 7))
    bv = r.uniform(-2, 2, (7, 3))
    a, b = ad.param(av), ad.param(bv)
    loss = ad.sum_all(ad.tanh(ad.matmul(a, b)))
    ad.backward(loss)

    def f(x, y):
        return float(np.tanh(x @ y).sum())

    na, nb = finite_difference_grad(f, [av, bv])
    assert max_rel_err(a.grad, na) <= NONLINEAR_TOL
    assert max_rel_err(b.grad, nb) <= NONLINEAR_TOL


def test_matmul_linear_gradient_tight():
    r = rng(2)
    av = r.uniform(-2, 2, (4, 6))
    bv = r.uniform(-2, 2, (6, 2))
    w = r.uniform(-1, 1, (4, 2))
    a, b = ad.param(av), ad.param(bv)
    loss = ad.sum_all(ad.mul(ad.matmul(a, b), ad.constant(w)))
    ad.backward(loss)

    def f(x, y):
        return float(((x @ y) * w).sum())

    na, nb = finite_difference_grad(f, [av, bv])
    assert max_rel_err(a.grad, na) <= LINEAR_TOL
    assert max_rel_err(b.grad, nb) <= LINEAR_TOL


# ----------------------------------------------------------- elementwise

def test_tanh_sigmoid_at_zero():
    z = ad.constant(np.zeros((1, 1)))
    assert ad.tanh(z).value[0, 0] == 0.0
    assert ad.sigmoid(z).value[0, 0] == 0.5


@pytest.mark.parametrize("opname", ["add", "mul", "tanh", "sigmoid", "exp", "neg"])
def test_elementwise_gradients(opname):
    r = rng(hash(opname) % 2**31)
    xv = r.uniform(-2, 2, (3, 4))
    yv = r.uniform(-2, 2, (3, 4))
    w = r.uniform(-1, 1, (3, 4))

    unary = {"tanh": (ad.tanh, np.tanh),
             "neg": (ad.neg, lambda v: -v),
             "exp": (ad.exp, np.exp),
             "sigmoid": (ad.sigmoid, lambda v: 1 / (1 + np.exp(-v)))}
    if opname in unary:
        op, ref = unary[opname]
        x = ad.param(xv)
        loss = ad.sum_all(ad.mul(op(x), ad.constant(w)))
        ad.backward(loss)
        (nx,) = finite_difference_grad(lambda v: float((ref(v) * w).sum()), [xv])
        tol = LINEAR_TOL if opname == "neg" else NONLINEAR_TOL
        assert max_rel_err(x.grad, nx) <= tol
    else:
        op = {"add": ad.add, "mul": ad.mul}[opname]
        ref = {"add": np.add, "mul": np.multiply}[opname]
        x, y = ad.param(xv), ad.param(yv)
        loss = ad.sum_all(ad.mul(op(x, y), ad.constant(w)))
        ad.backward(loss)
        nx, ny = finite_difference_grad(lambda u, v: float((ref(u, v) * w).sum()), [xv, yv])
        assert max_rel_err(x.grad, nx) <= NONLINEAR_TOL
        assert max_rel_err(y.grad, ny) <= NONLINEAR_TOL


def test_scalar_and_bias_row_broadcast():
    r = rng(3)
    mv = r.uniform(-1, 1, (4, 5))
    bv = r.uniform(-1, 1, (5,))
    m, b = ad.param(mv), ad.param(bv)
    loss = ad.sum_all(ad.tanh(ad.add(m, b)))
    ad.backward(loss)
    nm, nb = finite_difference_grad(lambda u, v: float(np.tanh(u + v).sum()), [mv, bv])
    assert max_rel_err(m.grad, nm) <= NONLINEAR_TOL
    assert max_rel_err(b.grad, nb) <= NONLINEAR_TOL

    s = ad.param(np.asarray(0.7))
    loss2 = ad.sum_all(ad.mul(ad.constant(mv), s))
    ad.backward(loss2)
    assert abs(float(s.grad) - mv.sum()) < 1e-12


def test_general_broadcast_rejected():
    col = ad.constant(np.ones((4, 1)))
    mat = ad.constant(np.ones((4, 5)))
    with pytest.raises(ad.ShapeError):
        ad.add(mat, col)


def test_nonfinite_forward_is_error():
    big = ad.constant(np.full((2, 2), 800.0))
    with pytest.raises(ad.NonFiniteError):
        ad.exp(big)


# ------------------------------------------------- structural ops

def test_concat_slice_rows_gradients():
    r = rng(4)
    av = r.uniform(-2, 2, (3, 2))
    bv = r.uniform(-2, 2, (3, 4))
    w = r.uniform(-1, 1, (3, 6))
    a, b = ad.param(av), ad.param(bv)
    cat = ad.concat_cols(a, b)
    loss = ad.sum_all(ad.mul(cat, ad.constant(w)))
    ad.backward(loss)
    np.testing.assert_allclose(a.grad, w[:, :2], atol=1e-15)
    np.testing.assert_allclose(b.grad, w[:, 2:], atol=1e-15)

    t = ad.param(av)
    sl = ad.slice_cols(t, 1, 2)
    ad.backward(ad.sum_all(sl))
    expect = np.zeros_like(av)
    expect[:, 1] = 1.0
    np.testing.assert_array_equal(t.grad, expect)

    table = ad.param(r.uniform(-1, 1, (5, 3)))
    idx = np.array([4, 0, 4])
    gathered = ad.rows(table, idx)
    ad.backward(ad.sum_all(gathered))
    expect = np.zeros((5, 3))
    expect[4] = 2.0
    expect[0] = 1.0
    np.testing.assert_array_equal(table.grad, expect)


def test_rows_index_out_of_range():
    table = ad.constant(np.ones((3, 2)))
    with pytest.raises(ad.ShapeError):
        ad.rows(table, [3])


# -------------------------------------------- softmax cross entropy

def test_cross_entropy_uniform_logits():
    logits = ad.constant(np.zeros((3, 4)))
    loss = ad.softmax_cross_entropy(logits, [0, 1, 3], reduction="mean")
    assert abs(float(loss.value) - np.log(4.0)) < 1e-12


def test_cross_entropy_saturated_match():
    v = np.full((2, 5), -1e6)
    v[0, 2] = 1e6
    v[1, 0] = 1e6
    loss = ad.softmax_cross_entropy(ad.constant(v), [2, 0])
    assert float(loss.value) < 1e-9
    assert float(loss.value) >= 0.0


def test_cross_entropy_vs_extended_precision():
    r = rng(5)
    lv = r.uniform(-3, 3, (3, 5))
    t = [1, 4, 0]
    loss = ad.softmax_cross_entropy(ad.constant(lv), t)
    assert abs(float(loss.value) - mp_log_softmax_nll(lv, t)) <= 1e-10


def test_cross_entropy_backward_is_softmax_minus_onehot():
    r = rng(6)
    lv = r.uniform(-2, 2, (4, 6))
    t = np.array([5, 2, 0, 2])
    logits = ad.param(lv)
    loss = ad.softmax_cross_entropy(logits, t)
    ad.backward(loss)
    sm = ad.softmax(lv)
    onehot = np.zeros_like(lv)
    onehot[np.arange(4), t] = 1.0
    np.testing.assert_allclose(logits.grad, sm - onehot, atol=1e-12)


def test_cross_entropy_ignore_index():
    r = rng(7)
    lv = r.uniform(-2, 2, (3, 4))
    logits = ad.param(lv)
    loss = ad.softmax_cross_entropy(logits, [1, 0, 0], ignore_index=0)
    ad.backward(loss)
    only = ad.softmax_cross_entropy(ad.constant(lv[:1]), [1])
    assert abs(float(loss.value) - float(only.value)) < 1e-12
    assert np.all(logits.grad[1:] == 0.0)


def test_cross_entropy_target_out_of_range():
    with pytest.raises(ad.AutodiffError):
        ad.softmax_cross_entropy(ad.constant(np.zeros((1, 3))), [3])


def test_softmax_rows_sum_to_one():
    r = rng(8)
    sm = ad.softmax(r.uniform(-30, 30, (20, 7)))
    np.testing.assert_allclose(sm.sum(axis=1), np.ones(20), atol=1e-12)


# ----------------------------------------------------------- backward

def test_backward_sum_gives_ones():
    w = ad.param(rng(9).uniform(-2, 2, (3, 5)))
    ad.backward(ad.sum_all(w))
    np.testing.assert_array_equal(w.grad, np.ones((3, 5)))


def test_backward_half_norm_squared():
    wv = rng(10).uniform(-2, 2, (4, 2))
    w = ad.param(wv)
    loss = ad.scale(ad.sum_all(ad.mul(w, w)), 0.5)
    ad.backward(loss)
    np.testing.assert_allclose(w.grad, wv, atol=1e-12)


def test_backward_requires_scalar_root():
    w = ad.param(np.ones((2, 2)))
    with pytest.raises(ad.AutodiffError):
        ad.backward(ad.tanh(w))


def test_backward_accumulates_without_reset():
    w = ad.param(np.ones(3))
    for _ in range(2):
        ad.backward(ad.sum_all(w))
    np.testing.assert_array_equal(w.grad, 2 * np.ones(3))
    w.zero_grad()
    ad.backward(ad.sum_all(w))
    np.testing.assert_array_equal(w.grad, np.ones(3))


def test_shared_subexpression_sums_paths():
    # f = g(h(x)) + k(h(x)) with h shared: grads add across both paths.
    xv = rng(11).uniform(-1, 1, (3,))
    x = ad.param(xv)
    h = ad.tanh(x)
    f = ad.add(ad.sum_all(ad.mul(h, h)), ad.sum_all(ad.exp(h)))
    ad.backward(f)
    (nx,) = finite_difference_grad(
        lambda v: float((np.tanh(v) ** 2).sum() + np.exp(np.tanh(v)).sum()), [xv])
    assert max_rel_err(x.grad, nx) <= NONLINEAR_TOL


def test_ops_do_not_mutate_inputs():
    xv = rng(12).uniform(-1, 1, (3, 3))
    x = ad.param(xv.copy())
    ad.tanh(x)
    ad.add(x, ad.constant(np.ones((3, 3))))
    ad.matmul(x, x)
    np.testing.assert_array_equal(x.value, xv)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_composite_graph_gradcheck(seed):
    r = np.random.default_rng(seed)
    xv = r.uniform(-2, 2, (2, 3))
    wv = r.uniform(-2, 2, (3, 2))
    bv = r.uniform(-2, 2, (2,))
    x, w, b = ad.param(xv), ad.param(wv), ad.param(bv)
    h = ad.tanh(ad.add(ad.matmul(x, w), b))
    out = ad.sum_all(ad.mul(ad.sigmoid(h), h))
    ad.backward(out)

    def f(u, v, c):
        t = np.tanh(u @ v + c)
        return float((t / (1 + np.exp(-t))).sum())

    nx, nw, nb = finite_difference_grad(f, [xv, wv, bv])
    assert max_rel_err(x.grad, nx) <= NONLINEAR_TOL
    assert max_rel_err(w.grad, nw) <= NONLINEAR_TOL
    assert max_rel_err(b.grad, nb) <= NONLINEAR_TOL
