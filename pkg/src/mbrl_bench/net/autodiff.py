"""Tiny reverse-mode autodiff over numpy arrays.

Only the operations needed to train MLP dynamics models are provided. Each
:class:`Tensor` records its parents and a closure that maps the output
gradient to parent gradients; :meth:`Tensor.backward` walks the graph in
reverse topological order.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, value, parents=(), backward=None, requires_grad=False):
        self.value = np.asarray(value, dtype=float)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        # constant subgraphs carry no history
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def __repr__(self):
        return f"Tensor(shape={self.shape})"

    # -- graph ---------------------------------------------------------------
    def backward(self, grad=None):
        if grad is None:
            if self.value.size != 1:
                raise ValueError("backward() without a seed gradient needs a scalar output")
            grad = np.ones_like(self.value)
        order, seen = [], set()

        def visit(node):
            # iterative DFS; deep multi-step rollouts would overflow recursion
            stack = [(node, False)]
            while stack:
                n, done = stack.pop()
                if done:
                    order.append(n)
                    continue
                if id(n) in seen:
                    continue
                seen.add(id(n))
                stack.append((n, True))
                for p in n._parents:
                    if p.requires_grad and id(p) not in seen:
                        stack.append((p, False))

        visit(self)
        grads = {id(self): grad}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                if node.requires_grad:
                    node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    # -- elementwise -----------------------------------------------------------
    def __add__(self, other):
        other = _lift(other)
        a, b = self, other
        return Tensor(
            a.value + b.value, (a, b),
            lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.value, (self,), lambda g: (-g,))

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    def __mul__(self, other):
        other = _lift(other)
        a, b = self, other
        return Tensor(
            a.value * b.value, (a, b),
            lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        a, b = self, other
        return Tensor(
            a.value / b.value, (a, b),
            lambda g: (
                _unbroadcast(g / b.value, a.shape),
                _unbroadcast(-g * a.value / b.value**2, b.shape),
            ),
        )

    def __rtruediv__(self, other):
        return _lift(other) / self

    def __pow__(self, k):
        if isinstance(k, Tensor):
            raise TypeError("only constant exponents are supported")
        a = self
        return Tensor(a.value**k, (a,), lambda g: (g * k * a.value ** (k - 1),))

    def __matmul__(self, other):
        other = _lift(other)
        a, b = self, other

        def back(g):
            ga = _unbroadcast(g @ np.swapaxes(b.value, -1, -2), a.shape) if a.requires_grad else None
            gb = _unbroadcast(np.swapaxes(a.value, -1, -2) @ g, b.shape) if b.requires_grad else None
            return ga, gb

        return Tensor(a.value @ b.value, (a, b), back)

    def __rmatmul__(self, other):
        return _lift(other) @ self

    def __getitem__(self, idx):
        a = self

        def back(g):
            out = np.zeros_like(a.value)
            if _is_fancy(idx):
                np.add.at(out, idx, g)
            else:
                out[idx] = g
            return (out,)

        return Tensor(a.value[idx], (a,), back)

    # -- unary -----------------------------------------------------------------
    def exp(self):
        v = np.exp(self.value)
        return Tensor(v, (self,), lambda g: (g * v,))

    def log(self):
        a = self
        return Tensor(np.log(a.value), (a,), lambda g: (g / a.value,))

    def sqrt(self):
        v = np.sqrt(self.value)
        # subgradient 0 at the origin keeps norms of exact predictions finite
        safe = np.where(v > 0, v, 1.0)
        return Tensor(v, (self,), lambda g: (np.where(v > 0, g * 0.5 / safe, 0.0),))

    def tanh(self):
        v = np.tanh(self.value)
        return Tensor(v, (self,), lambda g: (g * (1.0 - v**2),))

    def relu(self):
        mask = self.value > 0
        return Tensor(self.value * mask, (self,), lambda g: (g * mask,))

    def sigmoid(self):
        v = _sigmoid(self.value)
        return Tensor(v, (self,), lambda g: (g * v * (1.0 - v),))

    def swish(self):
        x = self.value
        s = _sigmoid(x)
        return Tensor(x * s, (self,), lambda g: (g * (s + x * s * (1.0 - s)),))

    def softplus(self):
        x = self.value
        return Tensor(_softplus(x), (self,), lambda g: (g * _sigmoid(x),))

    # -- reductions / shape ------------------------------------------------------
    def sum(self, axis=None, keepdims=False):
        a = self

        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, a.shape).copy(),)

        return Tensor(a.value.sum(axis=axis, keepdims=keepdims), (a,), back)

    def mean(self, axis=None, keepdims=False):
        n = self.value.size if axis is None else np.prod(
            [self.shape[i] for i in np.atleast_1d(axis)]
        )
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def reshape(self, *shape):
        a = self
        return Tensor(a.value.reshape(*shape), (a,), lambda g: (g.reshape(a.shape),))


def _is_fancy(idx):
    items = idx if isinstance(idx, tuple) else (idx,)
    return any(isinstance(i, (list, np.ndarray)) for i in items)


def _lift(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def concat(tensors, axis=-1):
    if not any(isinstance(t, Tensor) for t in tensors):
        return np.concatenate(tensors, axis=axis)
    ts = [_lift(t) for t in tensors]
    sizes = [t.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor(np.concatenate([t.value for t in ts], axis=axis), tuple(ts), back)


# numpy-or-Tensor helpers used by the MLP forward pass
def tanh(x):
    return x.tanh() if isinstance(x, Tensor) else np.tanh(x)


def relu(x):
    return x.relu() if isinstance(x, Tensor) else np.maximum(x, 0.0)


def swish(x):
    return x.swish() if isinstance(x, Tensor) else x * _sigmoid(x)


def softplus(x):
    return x.softplus() if isinstance(x, Tensor) else _softplus(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Tensor) else np.sqrt(x)


def exp(x):
    return x.exp() if isinstance(x, Tensor) else np.exp(x)


def value_and_grad(fn, arrays, *args):
    """Evaluate ``fn(tensors, *args)`` and its gradient w.r.t. ``arrays``.

    ``arrays`` is a list of numpy arrays; ``fn`` must return a scalar Tensor.
    Returns ``(loss_value, [grad arrays])``.
    """
    leaves = [Tensor(a, requires_grad=True) for a in arrays]
    out = fn(leaves, *args)
    out = _lift(out)
    loss = float(out.value)
    if not np.isfinite(loss):
        raise NonFiniteLossError(f"loss evaluated to {loss}; aborting before the parameter update")
    out.backward()
    grads = [np.zeros_like(a, dtype=float) if t.grad is None else t.grad for a, t in zip(arrays, leaves)]
    return loss, grads


class NonFiniteLossError(FloatingPointError):
    pass
