"""Reverse-mode automatic differentiation over dense float64 arrays.

Values are row-major numpy float64 arrays; a Node owns one value and, after a
backward pass, the gradient of the scalar root with respect to it. Graphs are
built eagerly by the op functions below and walked exactly once, in reverse
topological order, by backward(). Gradients accumulate until zero_grad() is
called, so two backward passes without a reset double the stored gradients.

Broadcasting is restricted to the two cases the models need: scalar with
tensor, and a bias row against a matrix. Anything else raises ShapeError.
Every op validates that its output is finite; NaN/Inf is an error state, not
a value (disable with set_finite_checks for hot loops at your own risk).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "AutodiffError",
    "ShapeError",
    "NonFiniteError",
    "Node",
    "param",
    "constant",
    "set_finite_checks",
    "matmul",
    "add",
    "mul",
    "sub",
    "neg",
    "tanh",
    "sigmoid",
    "exp",
    "scale",
    "sum_all",
    "row_sum",
    "concat_cols",
    "slice_cols",
    "rows",
    "softmax",
    "softmax_cross_entropy",
    "backward",
]


class AutodiffError(Exception):
    pass


class ShapeError(AutodiffError):
    pass


class NonFiniteError(AutodiffError):
    pass


_finite_checks = True


def set_finite_checks(enabled: bool) -> bool:
    """Toggle the NaN/Inf guard on op outputs; returns the previous setting."""
    global _finite_checks
    previous = _finite_checks
    _finite_checks = bool(enabled)
    return previous


def _finite_or_raise(value: np.ndarray, op_name: str) -> None:
    if _finite_checks and not np.isfinite(value).all():
        raise NonFiniteError(f"non-finite values produced by {op_name}")


class Node:
    """One vertex of the computation graph.

    ``value`` is a float64 ndarray, ``grad`` the accumulated gradient of the
    last backward root with respect to it (zeros until a pass reaches it).
    Leaf nodes are created by param() / constant(); everything else comes out
    of the op functions, which record the parent links and the local backward
    rule.
    """

    __slots__ = ("value", "requires_grad", "_grad", "_parents", "_back")

    def __init__(self, value, requires_grad=False, _parents=(), _back=None):
        # order="C" rather than ascontiguousarray: the latter promotes 0-d to 1-d.
        self.value = np.asarray(value, dtype=np.float64, order="C")
        self.requires_grad = bool(requires_grad)
        self._grad = None
        self._parents = _parents
        self._back = _back

    @property
    def shape(self):
        return self.value.shape

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            self._grad = np.zeros_like(self.value)
        return self._grad

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self._grad is None:
            self._grad = np.zeros_like(self.value)
        self._grad += g

    def zero_grad(self) -> None:
        self._grad = None

    def item(self) -> float:
        return float(self.value)

    # Operator sugar; second operands may be Nodes, scalars, or arrays.
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, _lift(other))

    def __repr__(self):
        kind = "param" if (self.requires_grad and not self._parents) else "node"
        return f"<{kind} shape={self.value.shape}>"


def param(value) -> Node:
    """Leaf node that receives gradients (a learnable weight)."""
    node = Node(value, requires_grad=True)
    _finite_or_raise(node.value, "param")
    return node


def constant(value) -> Node:
    """Leaf node excluded from differentiation (data, precomputed activations)."""
    node = Node(value, requires_grad=False)
    _finite_or_raise(node.value, "constant")
    return node


def _lift(x) -> Node:
    return x if isinstance(x, Node) else constant(x)


def _op(value, parents, back, name) -> Node:
    _finite_or_raise(value, name)
    if any(p.requires_grad for p in parents):
        return Node(value, requires_grad=True, _parents=tuple(parents), _back=back)
    return Node(value, requires_grad=False)


def _is_scalar(shape) -> bool:
    return int(np.prod(shape, dtype=np.int64)) == 1


def _is_bias_row(row_shape, mat_shape) -> bool:
    if len(mat_shape) != 2:
        return False
    n = mat_shape[1]
    return row_shape == (n,) or row_shape == (1, n)


def _reduce_to(g: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to the parent's shape."""
    if g.shape == shape:
        return g
    if _is_scalar(shape):
        return np.asarray(g.sum()).reshape(shape)
    # bias row against a matrix
    return g.sum(axis=0).reshape(shape)


def _check_ew_shapes(a: Node, b: Node, name: str) -> None:
    sa, sb = a.value.shape, b.value.shape
    if sa == sb or _is_scalar(sa) or _is_scalar(sb):
        return
    if _is_bias_row(sb, sa) or _is_bias_row(sa, sb):
        return
    raise ShapeError(f"{name}: unsupported shapes {sa} and {sb}")


def matmul(a: Node, b: Node) -> Node:
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {av.shape} and {bv.shape}")
    out = av @ bv

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g @ bv.T)
        if b.requires_grad:
            b.accumulate_grad(av.T @ g)

    return _op(out, (a, b), back, "matmul")


def add(a: Node, b: Node) -> Node:
    _check_ew_shapes(a, b, "add")
    out = a.value + b.value

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_reduce_to(g, a.value.shape))
        if b.requires_grad:
            b.accumulate_grad(_reduce_to(g, b.value.shape))

    return _op(out, (a, b), back, "add")


def mul(a: Node, b: Node) -> Node:
    _check_ew_shapes(a, b, "mul")
    av, bv = a.value, b.value
    out = av * bv

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(_reduce_to(g * bv, av.shape))
        if b.requires_grad:
            b.accumulate_grad(_reduce_to(g * av, bv.shape))

    return _op(out, (a, b), back, "mul")


def sub(a: Node, b: Node) -> Node:
    return add(a, neg(b))


def neg(a: Node) -> Node:
    out = -a.value

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(-g)

    return _op(out, (a,), back, "neg")


def tanh(a: Node) -> Node:
    t = np.tanh(a.value)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * (1.0 - t * t))

    return _op(t, (a,), back, "tanh")


def sigmoid(a: Node) -> Node:
    s = 1.0 / (1.0 + np.exp(-a.value))

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * s * (1.0 - s))

    return _op(s, (a,), back, "sigmoid")


def exp(a: Node) -> Node:
    # Overflow surfaces as inf and is caught by the finite check in _op.
    with np.errstate(over="ignore"):
        e = np.exp(a.value)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * e)

    return _op(e, (a,), back, "exp")


def scale(a: Node, c: float) -> Node:
    """Multiply by a plain float constant (no gradient for c)."""
    c = float(c)
    out = a.value * c

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g * c)

    return _op(out, (a,), back, "scale")


def sum_all(a: Node) -> Node:
    out = np.asarray(a.value.sum())

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(np.full_like(a.value, float(g)))

    return _op(out, (a,), back, "sum_all")


def row_sum(a: Node) -> Node:
    """Sum a matrix over its columns: (m, n) -> (m, 1)."""
    if a.value.ndim != 2:
        raise ShapeError(f"row_sum: expected a matrix, got shape {a.value.shape}")
    out = a.value.sum(axis=1, keepdims=True)

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(np.broadcast_to(g, a.value.shape).copy())

    return _op(out, (a,), back, "row_sum")


def concat_cols(a: Node, b: Node) -> Node:
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[0] != bv.shape[0]:
        raise ShapeError(f"concat_cols: incompatible shapes {av.shape} and {bv.shape}")
    out = np.concatenate([av, bv], axis=1)
    split = av.shape[1]

    def back(g):
        if a.requires_grad:
            a.accumulate_grad(g[:, :split])
        if b.requires_grad:
            b.accumulate_grad(g[:, split:])

    return _op(out, (a, b), back, "concat_cols")


def slice_cols(a: Node, lo: int, hi: int) -> Node:
    if a.value.ndim != 2 or not (0 <= lo <= hi <= a.value.shape[1]):
        raise ShapeError(f"slice_cols: bad range [{lo}, {hi}) for shape {a.value.shape}")
    out = a.value[:, lo:hi].copy()

    def back(g):
        if a.requires_grad:
            if a._grad is None:
                a._grad = np.zeros_like(a.value)
            a._grad[:, lo:hi] += g

    return _op(out, (a,), back, "slice_cols")


def rows(table: Node, idx) -> Node:
    """Gather table rows by integer index (embedding lookup)."""
    idx = np.asarray(idx, dtype=np.int64)
    if table.value.ndim != 2 or idx.ndim != 1:
        raise ShapeError("rows: expected a matrix and a 1-d index")
    if idx.size and (idx.min() < 0 or idx.max() >= table.value.shape[0]):
        raise ShapeError("rows: index out of range")
    out = table.value[idx]

    def back(g):
        if table.requires_grad:
            if table._grad is None:
                table._grad = np.zeros_like(table.value)
            np.add.at(table._grad, idx, g)

    return _op(out, (table,), back, "rows")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax of a plain array (no graph); stabilized by max shift."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: Node, targets, ignore_index=None,
                          reduction="sum") -> Node:
    """Negative log-likelihood of integer targets under row-wise softmax.

    ``logits`` is (n, v); ``targets`` length n. Rows whose target equals
    ``ignore_index`` contribute neither loss nor gradient. ``reduction`` is
    "sum" or "mean" (mean over non-ignored rows). Computed with the
    log-sum-exp stabilization; backward yields softmax(logits) - onehot.
    """
    lv = logits.value
    t = np.asarray(targets, dtype=np.int64)
    if lv.ndim != 2 or t.ndim != 1 or t.shape[0] != lv.shape[0]:
        raise ShapeError(f"softmax_cross_entropy: shapes {lv.shape} vs {t.shape}")
    n, v = lv.shape
    live = np.ones(n, dtype=bool) if ignore_index is None else (t != ignore_index)
    checked = t[live]
    if checked.size and (checked.min() < 0 or checked.max() >= v):
        raise AutodiffError("softmax_cross_entropy: target index out of range")
    if reduction not in ("sum", "mean"):
        raise AutodiffError(f"softmax_cross_entropy: unknown reduction {reduction!r}")

    shifted = lv - lv.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    safe_t = np.where(live, t, 0)
    log_p = shifted[np.arange(n), safe_t] - lse[:, 0]
    count = max(int(live.sum()), 1)
    total = -float(log_p[live].sum())
    out = np.asarray(total / count if reduction == "mean" else total)

    def back(g):
        if logits.requires_grad:
            sm = np.exp(shifted - lse)
            sm[np.arange(n), safe_t] -= 1.0
            sm[~live] = 0.0
            gscale = float(g) / count if reduction == "mean" else float(g)
            logits.accumulate_grad(sm * gscale)

    return _op(out, (logits,), back, "softmax_cross_entropy")


def _toposort(root: Node) -> list[Node]:
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen and parent.requires_grad:
                stack.append((parent, False))
    return order


def backward(root: Node) -> None:
    """Accumulate d(root)/d(leaf) into every reachable leaf that requires grad.

    ``root`` must be scalar. Each node is visited exactly once, in reverse
    topological order; gradients add onto whatever is already stored.
    """
    if root.value.shape != ():
        raise AutodiffError(f"backward: root must be scalar, got shape {root.value.shape}")
    if not root.requires_grad:
        return
    order = _toposort(root)
    root.accumulate_grad(np.asarray(1.0))
    for node in reversed(order):
        if node._back is not None and node._grad is not None:
            node._back(node._grad)
