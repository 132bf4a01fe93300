"""Wigner quasi-probability fields and their phase-space partials.

Fields are evaluated at points (x, p, t).  The loss needs dW/dt, dW/dx,
dW/dp and d^3W/dp^3; ``partials`` returns them stacked along the last axis in
that order.
"""

import math

import numpy as np

from .catalog import System
from .errors import ConfigError, DomainError, QuadratureError
from .quadrature import composite_gauss_legendre

SQRT2 = math.sqrt(2.0)
PT_CUTOFF = 20.0
PT_NODES = 2048


def wigner_ho(x, p, t):
    """Harmonic-oscillator Wigner function (superposition of the two lowest states)."""
    r2 = x**2 + p**2
    return np.exp(-r2) * (r2 + SQRT2 * x * np.cos(t) - SQRT2 * p * np.sin(t))


def pt_integrand(y, x, k, t):
    """Integrand of the truncated Poschl-Teller Wigner integral (real part, y >= 0)."""
    a, b = x + 0.5 * y, x - 0.5 * y
    ka = k * y
    envelope = (np.cosh(a) * np.cosh(b)) ** -2
    bracket = (
        2 * np.sinh(a) * np.sinh(b) * np.cos(ka)
        + SQRT2 * np.sinh(b) * np.cos(1.5 * t - ka)
        + SQRT2 * np.sinh(a) * np.cos(-1.5 * t - ka)
        + np.cos(ka)
    )
    return envelope * bracket


def default_pt_rule():
    return composite_gauss_legendre(0.0, PT_CUTOFF, PT_NODES)


def wigner_pt(x, k, t, rule=None, chunk=4096):
    """(3/4) * integral over [0, 20] of the Poschl-Teller Wigner integrand.

    The integrand is even in y, so the half-axis result carries a factor 2
    that is folded into the 3/4 prefactor.
    """
    rule = rule or default_pt_rule()
    if rule.interval != (0.0, PT_CUTOFF):
        raise ConfigError(f"Poschl-Teller rule must cover [0, {PT_CUTOFF:g}], got {rule.interval}")
    x, k, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, k, t)))
    shape = x.shape
    x, k, t = x.ravel(), k.ravel(), t.ravel()
    out = np.empty(x.size)
    y = rule.nodes
    for start in range(0, x.size, chunk):
        sl = slice(start, start + chunk)
        vals = pt_integrand(y[None, :], x[sl, None], k[sl, None], t[sl, None])
        out[sl] = 0.75 * rule(vals)
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite Poschl-Teller Wigner value")
    return out.reshape(shape)


class WignerSystem(System):
    dim = 1  # the potential network sees x only
    stationary = False
    has_amplitude = False
    phase_space = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))

    def __init__(self):
        super().__init__(self.phase_space)

    def coords(self, points):
        p = np.asarray(points, dtype=float)
        if p.shape[-1:] == (3,):
            return (p[..., 0], p[..., 1], p[..., 2])
        return (p,)

    def check_domain(self, points):
        p = np.asarray(points, dtype=float)
        if p.shape[-1:] != (3,):
            p = p[..., None]
        for i, (lo, hi) in enumerate(self.domain[: p.shape[-1]]):
            if np.any((p[..., i] < lo) | (p[..., i] > hi)):
                raise DomainError(f"point outside {self.id} phase-space domain")

    def position(self, points):
        return self.coords(points)[0]


class WignerHO(WignerSystem):
    kind = "WignerHO"

    @property
    def id(self):
        return "wigner-ho"

    def field(self, points):
        return wigner_ho(*self.coords(points))

    def potential(self, points):
        x = self.position(points)
        return 0.5 * x**2

    def partials(self, points):
        x, p, t = self.coords(points)
        e = np.exp(-(x**2 + p**2))
        c, s = np.cos(t), np.sin(t)
        poly = x**2 + p**2 + SQRT2 * x * c - SQRT2 * p * s
        dpoly_p = 2 * p - SQRT2 * s
        w_t = e * (-SQRT2 * x * s - SQRT2 * p * c)
        w_x = e * (-2 * x * poly + 2 * x + SQRT2 * c)
        w_p = e * (-2 * p * poly + dpoly_p)
        w_ppp = e * ((12 * p - 8 * p**3) * poly + 3 * (4 * p**2 - 2) * dpoly_p - 12 * p)
        return np.stack([w_t, w_x, w_p, w_ppp], axis=-1)


class WignerPT(WignerSystem):
    """Poschl-Teller (lam=2) Wigner field with finite-difference partials."""

    kind = "WignerPT"
    steps = {"x": 1e-3, "k": 1e-3, "t": 1e-3, "k3": 5e-3}

    def __init__(self, rule=None):
        super().__init__()
        self.rule = rule or default_pt_rule()

    @property
    def id(self):
        return "wigner-pt"

    def field(self, points):
        return wigner_pt(*self.coords(points), rule=self.rule)

    def potential(self, points):
        x = self.position(points)
        return -3.0 / np.cosh(x) ** 2

    def partials(self, points):
        x, k, t = self.coords(points)
        hx, hk, ht, h3 = (self.steps[n] for n in ("x", "k", "t", "k3"))
        f = lambda dx=0.0, dk=0.0, dt=0.0: wigner_pt(x + dx, k + dk, t + dt, self.rule)
        w_t = (f(dt=ht) - f(dt=-ht)) / (2 * ht)
        w_x = (f(dx=hx) - f(dx=-hx)) / (2 * hx)
        w_k = (f(dk=hk) - f(dk=-hk)) / (2 * hk)
        w_kkk = (f(dk=2 * h3) - 2 * f(dk=h3) + 2 * f(dk=-h3) - f(dk=-2 * h3)) / (2 * h3**3)
        return np.stack([w_t, w_x, w_k, w_kkk], axis=-1)
