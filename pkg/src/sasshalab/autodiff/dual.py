# src/sasshalab/autodiff/dual.py
"""
dual
====

- **Module:** `src/sasshalab/autodiff/dual.py`

Dual numbers over float64 arrays.

A `DualNumber` pairs a primal value with a tangent (its directional
derivative along a fixed direction `v`). Arithmetic on duals applies the
chain rule to the tangent exactly, so running the tape's reverse sweep on
duals instead of plain arrays yields both the gradient (primal part of the
adjoints) and the Hessian-vector product (tangent part) in one pass.

A tangent of ``None`` stands for an identically zero tangent; it keeps
the plain-gradient path free of tangent arithmetic.
"""

import numpy as np


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _scale(t, factor):
    return None if t is None else t * factor


class DualNumber:
    """
    Primal/tangent pair with chain-rule arithmetic.

    Attributes
    ----------
    primal : ndarray or float
        Value.
    tangent : ndarray, float or None
        Directional derivative; ``None`` means zero.
    """
    __slots__ = ("primal", "tangent")
    __array_ufunc__ = None

    def __init__(self, primal, tangent=None):
        self.primal = np.asarray(primal, dtype=np.float64)
        if tangent is not None:
            tangent = np.asarray(tangent, dtype=np.float64)
            if tangent.shape != self.primal.shape:
                tangent = np.broadcast_to(tangent, self.primal.shape).copy()
        self.tangent = tangent

    @staticmethod
    def lift(value) -> "DualNumber":
        """Wrap a constant (zero tangent); duals pass through unchanged."""
        return value if isinstance(value, DualNumber) else DualNumber(value)

    @property
    def shape(self) -> tuple:
        return self.primal.shape

    def __add__(self, other):
        other = DualNumber.lift(other)
        return DualNumber(self.primal + other.primal, _add(self.tangent, other.tangent))

    __radd__ = __add__

    def __neg__(self):
        return DualNumber(-self.primal, _scale(self.tangent, -1.0))

    def __sub__(self, other):
        return self + (-DualNumber.lift(other))

    def __rsub__(self, other):
        return DualNumber.lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, DualNumber):
            factor = np.asarray(other, dtype=np.float64)
            return DualNumber(self.primal * factor, _scale(self.tangent, factor))
        tangent = _add(
            None if self.tangent is None else self.tangent * other.primal,
            None if other.tangent is None else self.primal * other.tangent)
        return DualNumber(self.primal * other.primal, tangent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = DualNumber.lift(other)
        value = self.primal / other.primal
        tangent = _add(
            self.tangent,
            None if other.tangent is None else -value * other.tangent)
        return DualNumber(value, None if tangent is None else tangent / other.primal)

    def __rtruediv__(self, other):
        return DualNumber.lift(other) / self

    def _bilinear(self, other, fn):
        other = DualNumber.lift(other)
        tangent = _add(
            None if self.tangent is None else fn(self.tangent, other.primal),
            None if other.tangent is None else fn(self.primal, other.tangent))
        return DualNumber(fn(self.primal, other.primal), tangent)

    def __matmul__(self, other):
        return self._bilinear(other, np.matmul)

    def __rmatmul__(self, other):
        return DualNumber.lift(other)._bilinear(self, np.matmul)

    def outer(self, other):
        return self._bilinear(other, np.outer)

    @property
    def T(self):
        return DualNumber(self.primal.T, None if self.tangent is None else self.tangent.T)

    def sum(self, axis=None):
        return DualNumber(
            np.sum(self.primal, axis=axis),
            None if self.tangent is None else np.sum(self.tangent, axis=axis))

    def broadcast_to(self, shape, axis=None):
        """Undo a sum over `axis`: spread this value back to `shape`."""
        def spread(x):
            if axis == 1:
                x = x[:, None]
            elif axis == 0:
                x = x[None, :]
            return np.broadcast_to(x, shape).copy()
        return DualNumber(spread(self.primal), None if self.tangent is None else spread(self.tangent))

    def _unary(self, value, derivative):
        return DualNumber(value, _scale(self.tangent, derivative))

    def exp(self):
        value = np.exp(self.primal)
        return self._unary(value, value)

    def log(self):
        return self._unary(np.log(self.primal), 1.0 / self.primal)

    def tanh(self):
        value = np.tanh(self.primal)
        return self._unary(value, 1.0 - value * value)

    def _shifted_lse(self, axis):
        m = np.max(self.primal, axis=axis, keepdims=True)
        m = np.where(np.isfinite(m), m, 0.0)
        return m + np.log(np.sum(np.exp(self.primal - m), axis=axis, keepdims=True))

    def softmax(self, axis=None):
        """Softmax along `axis` (all entries when ``None``), max-shifted."""
        s = np.exp(self.primal - self._shifted_lse(axis))
        if self.tangent is None:
            return DualNumber(s)
        return DualNumber(s, s * (self.tangent - np.sum(s * self.tangent, axis=axis, keepdims=True)))

    def logsumexp(self, axis=None):
        """``log Σ exp`` along `axis`; finite for any finite input."""
        lse = self._shifted_lse(axis)
        value = np.squeeze(lse, axis=axis) if axis is not None else lse.reshape(())
        if self.tangent is None:
            return DualNumber(value)
        s = np.exp(self.primal - lse)
        return DualNumber(value, np.sum(s * self.tangent, axis=axis))

    def power(self, exponent: float):
        return self._unary(
            np.power(self.primal, exponent),
            exponent * np.power(self.primal, exponent - 1.0))

    def __repr__(self) -> str:
        return f"DualNumber(primal={self.primal!r}, tangent={self.tangent!r})"
