"""Reverse-mode differentiation over a flat parameter vector.

The tape is deliberately small: it supports exactly the operations the
steering models need (arithmetic, powers, slicing, summation, matmul, ELU,
sign-with-zero-gradient, polynomial evaluation). Model forward functions are
written once and run in two modes: with a plain ndarray parameter vector
(fast, no tape) or with a ``Node`` wrapping it (records the tape so
``eval_loss_and_grad`` can back-propagate). ``sign`` always detaches: it is
piecewise constant, so its contribution to the gradient is zero everywhere,
including at 0 where sign(0) = 0.

Everything is float64. Evaluation is pure and deterministic given
(params, batch); Nodes are created per call and never shared across calls.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import LayoutError, NumericError

_ORDER = itertools.count()


class Node:
    """One tape entry: a value plus vector-Jacobian closures to its parents."""

    __slots__ = ("value", "parents", "order")

    # Make ndarray <op> Node defer to the reflected Node methods instead of
    # numpy trying (and failing) to broadcast over the Node object.
    __array_ufunc__ = None

    def __init__(self, value, parents=()):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.order = next(_ORDER)

    @property
    def shape(self):
        return self.value.shape

    def __len__(self):
        return len(self.value)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Node):
            return Node(self.value + other.value,
                        ((self, lambda g: _unbroadcast(g, self.value.shape)),
                         (other, lambda g: _unbroadcast(g, other.value.shape))))
        return Node(self.value + other,
                    ((self, lambda g: _unbroadcast(g, self.value.shape)),))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Node):
            return Node(self.value - other.value,
                        ((self, lambda g: _unbroadcast(g, self.value.shape)),
                         (other, lambda g: _unbroadcast(-g, other.value.shape))))
        return Node(self.value - other,
                    ((self, lambda g: _unbroadcast(g, self.value.shape)),))

    def __rsub__(self, other):
        return Node(other - self.value,
                    ((self, lambda g: _unbroadcast(-g, self.value.shape)),))

    def __neg__(self):
        return Node(-self.value, ((self, lambda g: -g),))

    def __mul__(self, other):
        if isinstance(other, Node):
            return Node(self.value * other.value,
                        ((self, lambda g, ov=other.value: _unbroadcast(g * ov, self.value.shape)),
                         (other, lambda g, sv=self.value: _unbroadcast(g * sv, other.value.shape))))
        other = np.asarray(other, dtype=np.float64)
        return Node(self.value * other,
                    ((self, lambda g, ov=other: _unbroadcast(g * ov, self.value.shape)),))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Node):
            inv = 1.0 / other.value
            return Node(self.value * inv,
                        ((self, lambda g, iv=inv: _unbroadcast(g * iv, self.value.shape)),
                         (other, lambda g, sv=self.value, iv=inv:
                          _unbroadcast(-g * sv * iv * iv, other.value.shape))))
        return self * (1.0 / np.asarray(other, dtype=np.float64))

    def __rtruediv__(self, other):
        inv = 1.0 / self.value
        return Node(other * inv,
                    ((self, lambda g, iv=inv, o=other: _unbroadcast(-g * o * iv * iv,
                                                                    self.value.shape)),))

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only constant exponents are supported")
        val = self.value ** exponent
        return Node(val, ((self, lambda g, e=exponent: _unbroadcast(
            g * e * self.value ** (e - 1), self.value.shape)),))

    def __getitem__(self, key):
        def vjp(g, key=key, shape=self.value.shape):
            out = np.zeros(shape)
            out[key] = g
            return out
        return Node(self.value[key], ((self, vjp),))


def _unbroadcast(g, shape):
    """Reduce gradient ``g`` back to ``shape`` after numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def value_of(x):
    return x.value if isinstance(x, Node) else np.asarray(x, dtype=np.float64)


def sign(x):
    """sign with sign(0) = 0 and zero gradient everywhere (detached)."""
    return np.sign(value_of(x))


def elu(x):
    """Exponential linear unit with alpha = 1."""
    if isinstance(x, Node):
        v = x.value
        val = np.where(v > 0.0, v, np.expm1(v))
        dval = np.where(v > 0.0, 1.0, val + 1.0)
        return Node(val, ((x, lambda g, d=dval: _unbroadcast(g * d, v.shape)),))
    return np.where(x > 0.0, x, np.expm1(x))


def nsum(x, axis=None):
    """Summation over one axis, a tuple of axes, or everything."""
    if isinstance(x, Node):
        shape = x.value.shape

        def vjp(g, axis=axis, shape=shape):
            if axis is not None:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, shape).copy()

        return Node(np.sum(x.value, axis=axis), ((x, vjp),))
    return np.sum(x, axis=axis)


def dot(a, b):
    """Inner product along the last axis."""
    return nsum(a * b, axis=-1)


def reshape(x, shape):
    if isinstance(x, Node):
        old = x.value.shape
        return Node(x.value.reshape(shape), ((x, lambda g: g.reshape(old)),))
    return np.reshape(x, shape)


def matmul(a, b):
    """Matrix product supporting (n,k)@(k,m) and (n,k)@(k,) operands."""
    def vjp_a(g, bv):
        return np.outer(g, bv) if bv.ndim == 1 else g @ bv.T

    def vjp_b(g, av):
        return av.T @ g

    if isinstance(a, Node) and isinstance(b, Node):
        return Node(a.value @ b.value,
                    ((a, lambda g, bv=b.value: vjp_a(g, bv)),
                     (b, lambda g, av=a.value: vjp_b(g, av))))
    if isinstance(a, Node):
        bv = np.asarray(b, dtype=np.float64)
        return Node(a.value @ bv, ((a, lambda g, bv=bv: vjp_a(g, bv)),))
    if isinstance(b, Node):
        av = np.asarray(a, dtype=np.float64)
        return Node(av @ b.value, ((b, lambda g, av=av: vjp_b(g, av)),))
    return a @ b


def polyval(coeffs: Sequence, x):
    """Evaluate sum_s coeffs[s] * x**s by Horner's rule.

    ``coeffs`` are ascending-degree; entries may be Nodes, ``x`` is a constant
    array (the tape never differentiates with respect to inputs).
    """
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def backward(root: Node) -> dict:
    """Gradients of scalar ``root`` with respect to every reachable Node.

    Returns a dict keyed by ``id(node)``. Nodes are created in topological
    order, so reverse creation order is a valid reverse-topological sweep.
    """
    seen = {}
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append(parent)
    grads = {id(root): np.ones_like(root.value)}
    for node in sorted(seen.values(), key=lambda n: n.order, reverse=True):
        g = grads.get(id(node))
        if g is None:
            continue
        for parent, vjp in node.parents:
            pg = vjp(g)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    return grads


# -- parameter vectors ------------------------------------------------------

@dataclass(frozen=True)
class ParamVector:
    """Flat learnable-parameter vector with a named-segment layout.

    ``layout`` is a tuple of (name, start, stop) triples; segments must be
    disjoint and cover the whole vector in order.
    """

    values: np.ndarray
    layout: tuple

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.array(self.values, dtype=np.float64, copy=True))
        if self.values.ndim != 1:
            raise LayoutError("parameter vector must be one-dimensional")
        pos = 0
        for name, start, stop in self.layout:
            if start != pos or stop < start:
                raise LayoutError(
                    f"segment {name!r} spans [{start}, {stop}) but previous "
                    f"segment ended at {pos}; segments must be contiguous")
            pos = stop
        if pos != self.values.size:
            raise LayoutError(
                f"layout covers {pos} entries, vector has {self.values.size}")

    @property
    def size(self) -> int:
        return self.values.size

    def segment(self, name: str) -> np.ndarray:
        for seg_name, start, stop in self.layout:
            if seg_name == name:
                return self.values[start:stop]
        raise LayoutError(f"no segment named {name!r}")

    def replace_values(self, values: np.ndarray) -> "ParamVector":
        return ParamVector(values, self.layout)


@dataclass(frozen=True)
class GradResult:
    """Loss [rad^2 for the MSE losses used here] and d(loss)/d(params)."""

    loss: float
    gradient: np.ndarray


def _batch_arrays(batch):
    """Accept a WindowBatch-like object or an iterable of windowed samples."""
    if hasattr(batch, "ay") and hasattr(batch, "targets"):
        return batch.ay, batch.ax, batch.vx, batch.targets
    samples = list(batch)
    if not samples:
        raise ValueError("batch is empty")
    ay = np.stack([s.input.ay_window for s in samples])
    ax = np.stack([s.input.ax_window for s in samples])
    vx = np.stack([s.input.vx_window for s in samples])
    targets = np.array([s.target for s in samples], dtype=np.float64)
    return ay, ax, vx, targets


def eval_loss_and_grad(model_forward: Callable, params: ParamVector,
                       batch) -> GradResult:
    """Mean-squared-error loss and its gradient by reverse accumulation.

    ``model_forward(p, ay, ax, vx)`` must return per-sample predictions [rad];
    ``p`` is either the flat ndarray or a Node wrapping it.
    """
    ay, ax, vx, targets = _batch_arrays(batch)
    n = targets.size
    leaf = Node(params.values)
    pred = model_forward(leaf, ay, ax, vx)
    pred_value = value_of(pred)
    if pred_value.shape != targets.shape:
        raise LayoutError(
            f"model produced shape {pred_value.shape}, targets have {targets.shape}")
    bad = ~np.isfinite(pred_value)
    if bad.any():
        raise NumericError(
            f"non-finite model output at sample index {int(np.argmax(bad))}")
    err = pred - targets if isinstance(pred, Node) else Node(pred - targets)
    loss = nsum(err * err) * (1.0 / n)
    grads = backward(loss)
    gradient = grads.get(id(leaf))
    if gradient is None:
        gradient = np.zeros_like(params.values)
    if not np.isfinite(gradient).all():
        raise NumericError("non-finite gradient")
    return GradResult(loss=float(loss.value), gradient=gradient)


def eval_loss(model_forward: Callable, values: np.ndarray, batch) -> float:
    """Tape-free MSE evaluation used by the finite-difference oracle."""
    ay, ax, vx, targets = _batch_arrays(batch)
    pred = model_forward(np.asarray(values, dtype=np.float64), ay, ax, vx)
    return float(np.mean((pred - targets) ** 2))


def finite_diff_grad(model_forward: Callable, params: ParamVector, batch,
                     step: float) -> np.ndarray:
    """Central-difference gradient, same layout as ``params``."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    base = np.array(params.values, dtype=np.float64)
    grad = np.zeros_like(base)
    for i in range(base.size):
        saved = base[i]
        base[i] = saved + step
        hi = eval_loss(model_forward, base, batch)
        base[i] = saved - step
        lo = eval_loss(model_forward, base, batch)
        base[i] = saved
        grad[i] = (hi - lo) / (2.0 * step)
    return grad
