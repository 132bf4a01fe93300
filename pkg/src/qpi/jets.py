"""Truncated Taylor arithmetic used to seed and inspect network derivatives.

``Jet3`` carries a value and its first three derivatives with respect to one
scalar variable (raw derivatives, not divided by k!).  ``Dual2D`` carries a
value and its two first partials.  Coefficients may be floats or numpy arrays.
"""

from dataclasses import dataclass

import numpy as np


def faa_di_bruno(f, z):
    """Derivatives 0..3 of f(z(x)) from f^(0..3) at z0 and z^(0..3)."""
    z1, z2, z3 = z[1], z[2], z[3]
    return (
        f[0],
        f[1] * z1,
        f[2] * z1**2 + f[1] * z2,
        f[3] * z1**3 + 3 * f[2] * z1 * z2 + f[1] * z3,
    )


def tanh_derivs(z, n=3):
    t = np.tanh(z)
    d1 = 1 - t * t
    out = [t, d1, -2 * t * d1]
    out.append(-2 * d1 * (1 - 3 * t * t))
    if n >= 4:
        out.append(-2 * out[2] * (1 - 3 * t * t) + 12 * t * d1 * d1)
    return out[: n + 1]


def sigmoid_derivs(z, n=3):
    s = 0.5 * (1 + np.tanh(0.5 * z))
    s1 = s * (1 - s)
    s2 = s1 * (1 - 2 * s)
    out = [s, s1, s2, s2 * (1 - 2 * s) - 2 * s1 * s1]
    if n >= 4:
        out.append(out[3] * (1 - 2 * s) - 6 * s1 * s2)
    return out[: n + 1]


@dataclass(frozen=True)
class Jet3:
    c0: object
    c1: object = 0.0
    c2: object = 0.0
    c3: object = 0.0

    @classmethod
    def variable(cls, x):
        return cls(x, 1.0, 0.0, 0.0)

    @classmethod
    def constant(cls, c):
        return cls(c, 0.0, 0.0, 0.0)

    @property
    def coefficients(self):
        return (self.c0, self.c1, self.c2, self.c3)

    def _lift(self, other):
        return other if isinstance(other, Jet3) else Jet3.constant(other)

    def __add__(self, other):
        o = self._lift(other)
        return Jet3(*(a + b for a, b in zip(self.coefficients, o.coefficients)))

    __radd__ = __add__

    def __neg__(self):
        return Jet3(*(-a for a in self.coefficients))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        f, g = self.coefficients, self._lift(other).coefficients
        return Jet3(
            f[0] * g[0],
            f[1] * g[0] + f[0] * g[1],
            f[2] * g[0] + 2 * f[1] * g[1] + f[0] * g[2],
            f[3] * g[0] + 3 * f[2] * g[1] + 3 * f[1] * g[2] + f[0] * g[3],
        )

    __rmul__ = __mul__

    def reciprocal(self):
        u = self.c0
        return self.apply((1 / u, -1 / u**2, 2 / u**3, -6 / u**4))

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, n):
        out = Jet3.constant(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def apply(self, f):
        """Compose with a scalar function given its derivatives 0..3 at c0."""
        return Jet3(*faa_di_bruno(f, self.coefficients))

    def tanh(self):
        return self.apply(tanh_derivs(self.c0))

    def sigmoid(self):
        return self.apply(sigmoid_derivs(self.c0))

    def exp(self):
        e = np.exp(self.c0)
        return self.apply((e, e, e, e))

    def sin(self):
        s, c = np.sin(self.c0), np.cos(self.c0)
        return self.apply((s, c, -s, -c))

    def cos(self):
        s, c = np.sin(self.c0), np.cos(self.c0)
        return self.apply((c, -s, -c, s))


@dataclass(frozen=True)
class Dual2D:
    value: object
    dx: object = 0.0
    dy: object = 0.0

    @classmethod
    def seed_x(cls, x):
        return cls(x, 1.0, 0.0)

    @classmethod
    def seed_y(cls, y):
        return cls(y, 0.0, 1.0)

    def _lift(self, other):
        return other if isinstance(other, Dual2D) else Dual2D(other)

    def __add__(self, other):
        o = self._lift(other)
        return Dual2D(self.value + o.value, self.dx + o.dx, self.dy + o.dy)

    __radd__ = __add__

    def __neg__(self):
        return Dual2D(-self.value, -self.dx, -self.dy)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return Dual2D(
            self.value * o.value,
            self.dx * o.value + self.value * o.dx,
            self.dy * o.value + self.value * o.dy,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        inv = 1 / o.value
        return self * Dual2D(inv, -o.dx * inv**2, -o.dy * inv**2)

    def apply(self, f0, f1):
        return Dual2D(f0, f1 * self.dx, f1 * self.dy)

    def tanh(self):
        t = np.tanh(self.value)
        return self.apply(t, 1 - t * t)

    def sigmoid(self):
        s = sigmoid_derivs(self.value, 1)
        return self.apply(s[0], s[1])

    def exp(self):
        e = np.exp(self.value)
        return self.apply(e, e)
