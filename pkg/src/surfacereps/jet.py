"""First-order jets of unitary-matrix expressions.

A :class:`Jet` carries a value ``val`` (n, n) and a batch of velocities
``tan`` (K, n, n). Products, inverses, transposes and conjugates propagate
velocities by the product rule, so any expression built from these
operations yields its exact differential along K directions at once.

The helpers :func:`mul`, :func:`inv`, :func:`conj`, :func:`transpose` accept
plain arrays too, letting the same code evaluate values or jets.
"""

import numpy as np


class Jet:
    __slots__ = ("val", "tan")
    __array_ufunc__ = None   # let ndarray @ Jet fall through to __rmatmul__

    def __init__(self, val, tan):
        self.val = val
        self.tan = tan

    @classmethod
    def constant(cls, val, k):
        n = val.shape[0]
        return cls(val, np.zeros((k, n, n), complex))

    def __matmul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val @ other.val, self.tan @ other.val + self.val @ other.tan)
        return Jet(self.val @ other, self.tan @ other)

    def __rmatmul__(self, other):
        return Jet(other @ self.val, other @ self.tan)

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val - other.val, self.tan - other.tan)
        return Jet(self.val - other, self.tan)

    @property
    def T(self):
        return Jet(self.val.T, np.swapaxes(self.tan, -1, -2))

    def conj(self):
        return Jet(self.val.conj(), self.tan.conj())

    def inv(self):
        # all values here are unitary
        vi = self.val.conj().T
        return Jet(vi, -(vi @ self.tan @ vi))


def mul(*factors):
    out = factors[0]
    for f in factors[1:]:
        out = out @ f
    return out


def inv(x):
    if isinstance(x, Jet):
        return x.inv()
    return x.conj().T


def conj(x):
    return x.conj()


def transpose(x):
    return x.T


def value(x):
    return x.val if isinstance(x, Jet) else x
