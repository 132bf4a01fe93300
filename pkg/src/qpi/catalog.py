"""Closed-form quantum systems: amplitudes, potentials and kinetic ratios.

Every stationary system exposes the kinetic ratio ``-(hbar^2/2m) lap|psi| / |psi|``
and its spatial gradient, both assembled from hand-derived derivatives of the
amplitude.  Adding the true potential to the ratio gives the (constant)
energy; that identity is what the TISE loss exploits.

All evaluators are vectorised: 1D systems take arrays of positions, multi-
dimensional ones take arrays whose last axis holds the coordinates.
"""

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite as _herm
from numpy.polynomial import legendre as _leg
from scipy.special import genlaguerre

from .errors import ConfigError, DomainError, NodalPointError
from .quadrature import integrate

NODAL_EPSILON = 1e-6
BOHR_PER_ANGSTROM = 1.0 / 0.529177210903


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0

    @property
    def kinetic(self):
        """Prefactor hbar^2 / 2m of the Laplacian."""
        return self.hbar**2 / (2.0 * self.mass)


UNIT = PhysicalConstants()


def _leibniz(f, g):
    """Derivatives 0..3 of a product from derivatives 0..3 of its factors."""
    return (
        f[0] * g[0],
        f[1] * g[0] + f[0] * g[1],
        f[2] * g[0] + 2 * f[1] * g[1] + f[0] * g[2],
        f[3] * g[0] + 3 * f[2] * g[1] + 3 * f[1] * g[2] + f[0] * g[3],
    )


def _poly_derivs(poly, u):
    return tuple(poly.deriv(k)(u) if k else poly(u) for k in range(4))


def _check_nodes(amp):
    bad = np.abs(amp) < NODAL_EPSILON
    if np.any(bad):
        raise NodalPointError(f"{int(np.count_nonzero(bad))} point(s) with |psi| < {NODAL_EPSILON:g}")


class System:
    """Common surface of catalog entries."""

    kind = "abstract"
    dim = 1  # number of network inputs
    stationary = True
    has_amplitude = True
    energy = None

    def __init__(self, domain, constants=UNIT):
        self.domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        for lo, hi in self.domain:
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ConfigError(f"bad domain interval [{lo}, {hi}]")
        self.constants = constants

    @property
    def id(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.id}>"

    def coords(self, points):
        p = np.asarray(points, dtype=float)
        if self.dim == 1:
            if p.ndim >= 1 and p.shape[-1:] == (1,) and p.ndim > 1:
                p = p[..., 0]
            return (p,)
        if p.shape[-1] != self.dim:
            raise ConfigError(f"{self.id} expects points with {self.dim} coordinates")
        return tuple(p[..., i] for i in range(self.dim))

    def check_domain(self, points):
        for c, (lo, hi) in zip(self.coords(points), self.domain):
            if np.any((c < lo) | (c > hi)) or not np.all(np.isfinite(c)):
                raise DomainError(f"point outside {self.id} domain {self.domain}")

    def amplitude(self, points):
        return np.abs(self.psi(points))

    def psi(self, points):
        raise NotImplementedError

    def potential(self, points):
        raise NotImplementedError


class Stationary1D(System):
    """1D stationary state described through amplitude derivatives 0..3."""

    def derivatives(self, x):
        raise NotImplementedError

    def psi(self, points):
        return self.derivatives(self.coords(points)[0])[0]

    def kinetic_ratio(self, points):
        d = self.derivatives(self.coords(points)[0])
        _check_nodes(d[0])
        return -self.constants.kinetic * d[2] / d[0]

    def kinetic_ratio_grad(self, points):
        """d/dx of the kinetic ratio, shape (..., 1)."""
        d = self.derivatives(self.coords(points)[0])
        _check_nodes(d[0])
        g = -self.constants.kinetic * (d[3] * d[0] - d[2] * d[1]) / d[0] ** 2
        return g[..., None]


class HarmonicOscillator1D(Stationary1D):
    kind = "HarmonicOsc1D"

    def __init__(self, n=0, domain=((-5.0, 5.0),), constants=UNIT):
        if n < 0:
            raise ConfigError("n must be >= 0")
        super().__init__(domain, constants)
        self.n = int(n)
        c = constants
        self.scale = math.sqrt(c.mass * c.omega / c.hbar)
        self.norm = (self.scale**2 / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
        self._hermite = _herm.Hermite.basis(n)
        self.energy = c.hbar * c.omega * (n + 0.5)

    @property
    def id(self):
        return f"ho1d:n={self.n}"

    def derivatives(self, x):
        xi = self.scale * np.asarray(x, dtype=float)
        e = np.exp(-0.5 * xi**2)
        gauss = (e, -xi * e, (xi**2 - 1) * e, (3 * xi - xi**3) * e)
        d = _leibniz(gauss, _poly_derivs(self._hermite, xi))
        return tuple(self.norm * self.scale**k * dk for k, dk in enumerate(d))

    def potential(self, points):
        x = self.coords(points)[0]
        c = self.constants
        return 0.5 * c.mass * c.omega**2 * x**2


class PoschlTeller(Stationary1D):
    """Bound state P_lam^mu(tanh x) of V = -(hbar^2/2m) lam(lam+1) sech^2 x."""

    kind = "PoschlTeller"

    def __init__(self, lam=2, mu=1, domain=((-3.0, 3.0),), constants=UNIT):
        if lam < 1 or not 1 <= mu <= lam:
            raise ConfigError("need lam >= 1 and 1 <= mu <= lam")
        super().__init__(domain, constants)
        self.lam, self.mu = int(lam), int(mu)
        # P_lam^mu(u) = (-1)^mu (1-u^2)^(mu/2) d^mu P_lam/du^mu, and (1-tanh^2)^(1/2) = sech
        self._poly = (-1) ** mu * _leg.Legendre.basis(lam).deriv(mu)
        self.energy = -constants.kinetic * mu**2

    @property
    def id(self):
        return f"pt:l={self.lam},mu={self.mu}"

    def derivatives(self, x):
        x = np.asarray(x, dtype=float)
        mu = self.mu
        t = np.tanh(x)
        w = 1.0 - t**2
        s = np.cosh(x) ** -mu
        a = mu * (mu + 1) * t**2 - mu
        sech_pow = (s, -mu * t * s, s * a, s * (-mu * t * a + 2 * mu * (mu + 1) * t * w))
        q0, q1, q2, q3 = _poly_derivs(self._poly, t)
        poly_part = (
            q0,
            q1 * w,
            w * (q2 * w - 2 * t * q1),
            q3 * w**3 - 6 * t * w**2 * q2 + (4 * t**2 * w - 2 * w**2) * q1,
        )
        return _leibniz(sech_pow, poly_part)

    def potential(self, points):
        x = self.coords(points)[0]
        return -self.constants.kinetic * self.lam * (self.lam + 1) / np.cosh(x) ** 2


class HydrogenRadial(Stationary1D):
    """Reduced radial function u_nl(r) = r R_nl(r) with Coulomb + centrifugal V.

    Units take e = 1 so the Bohr radius is hbar^2/m.  The 2p state (n=2, l=1)
    reduces to u = r^2 exp(-r/2) / sqrt(24) with energy -1/8.
    """

    kind = "HydrogenRadial"

    def __init__(self, n=2, l=1, domain=((0.5, 10.0),), constants=UNIT):
        if n < 1 or not 0 <= l < n:
            raise ConfigError("need n >= 1 and 0 <= l < n")
        if domain[0][0] <= 0:
            raise ConfigError("hydrogen radial domain must exclude r <= 0")
        super().__init__(domain, constants)
        self.n, self.l = int(n), int(l)
        self.bohr = constants.hbar**2 / constants.mass
        self.rate = 2.0 / (n * self.bohr)  # rho = rate * r
        norm_r = math.sqrt(self.rate**3 * math.factorial(n - l - 1) / (2 * n * math.factorial(n + l)))
        self.norm = norm_r / self.rate  # u = norm * rho^(l+1) e^(-rho/2) L(rho)
        lag = genlaguerre(n - l - 1, 2 * l + 1)
        self._laguerre = np.polynomial.Polynomial(lag.coeffs[::-1])
        self._monomial = np.polynomial.Polynomial.basis(l + 1)
        self.energy = -1.0 / (2 * n**2 * self.bohr)

    @property
    def id(self):
        return f"h:n={self.n},l={self.l}"

    def check_domain(self, points):
        if np.any(self.coords(points)[0] <= 0):
            raise DomainError("hydrogen radial coordinate must be positive")
        super().check_domain(points)

    def derivatives(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("hydrogen radial coordinate must be positive")
        rho = self.rate * r
        e = np.exp(-0.5 * rho)
        decay = (e, -0.5 * e, 0.25 * e, -0.125 * e)
        d = _leibniz(_leibniz(_poly_derivs(self._monomial, rho), decay), _poly_derivs(self._laguerre, rho))
        return tuple(self.norm * self.rate**k * dk for k, dk in enumerate(d))

    def potential(self, points):
        r = self.coords(points)[0]
        if np.any(r <= 0):
            raise DomainError("hydrogen radial coordinate must be positive")
        return self.constants.kinetic * self.l * (self.l + 1) / r**2 - 1.0 / r


class HarmonicOscillator2D(System):
    kind = "HarmonicOsc2D"
    dim = 2

    def __init__(self, nx=0, ny=0, domain=((0.0, 1.0), (0.0, 1.0)), constants=UNIT):
        super().__init__(domain, constants)
        self.nx, self.ny = int(nx), int(ny)
        self._fx = HarmonicOscillator1D(nx, domain[:1], constants)
        self._fy = HarmonicOscillator1D(ny, domain[1:], constants)
        self.energy = constants.hbar * constants.omega * (nx + ny + 1)

    @property
    def id(self):
        return f"ho2d:nx={self.nx},ny={self.ny}"

    def psi(self, points):
        x, y = self.coords(points)
        return self._fx.derivatives(x)[0] * self._fy.derivatives(y)[0]

    def _parts(self, points):
        x, y = self.coords(points)
        dx, dy = self._fx.derivatives(x), self._fy.derivatives(y)
        _check_nodes(dx[0] * dy[0])
        return dx, dy

    def kinetic_ratio(self, points):
        dx, dy = self._parts(points)
        return -self.constants.kinetic * (dx[2] / dx[0] + dy[2] / dy[0])

    def kinetic_ratio_grad(self, points):
        c = self.constants.kinetic
        out = []
        for d in self._parts(points):
            out.append(-c * (d[3] * d[0] - d[2] * d[1]) / d[0] ** 2)
        return np.stack(out, axis=-1)

    def potential(self, points):
        x, y = self.coords(points)
        c = self.constants
        return 0.5 * c.mass * c.omega**2 * (x**2 + y**2)


class PerturbedBoxState:
    """First-order corrected box eigenstate psi_n = psi0_n + sum_k c_k psi0_k."""

    def __init__(self, n_state, n_basis, strength=10.0, length=1.0, constants=UNIT):
        if n_state < 1:
            raise ConfigError("n_state must be >= 1")
        if n_basis <= n_state:
            raise ConfigError("n_basis must exceed n_state")
        self.n, self.n_basis = int(n_state), int(n_basis)
        self.strength, self.length, self.constants = float(strength), float(length), constants
        n = self.n
        self.corrections = {
            k: self.matrix_element(n, k) / (self.unperturbed_energy(n) - self.unperturbed_energy(k))
            for k in range(1, n_basis + 1)
            if k != n
        }
        amps = np.zeros(n_basis + 1)
        amps[n] = 1.0
        for k, c in self.corrections.items():
            amps[k] = c
        self.amplitudes = amps

    def unperturbed_energy(self, k):
        return k**2 * math.pi**2 * self.constants.kinetic / self.length**2

    def matrix_element(self, n, k):
        """<psi0_n | strength x^2 | psi0_k> in closed form."""
        L = self.length
        if n == k:
            return self.strength * L**2 * (1.0 / 3.0 - 1.0 / (2 * n**2 * math.pi**2))
        return self.strength * L**2 * (-1) ** (n + k) * 8 * n * k / (math.pi**2 * (n**2 - k**2) ** 2)

    def derivatives(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(1, self.n_basis + 1)
        wave = k * math.pi / self.length
        phase = np.multiply.outer(x, wave)
        a = math.sqrt(2.0 / self.length) * self.amplitudes[1:]
        s, c = np.sin(phase), np.cos(phase)
        return (s @ a, c @ (a * wave), -(s @ (a * wave**2)), -(c @ (a * wave**3)))

    def __call__(self, x):
        return self.derivatives(x)[0]


def perturbed_pib_wavefunction(n_state, n_basis=20, strength=10.0):
    return PerturbedBoxState(n_state, n_basis, strength)


class ParticleInBoxPerturbed(Stationary1D):
    """Box [0, L] perturbed by strength * x^2; amplitude from first-order theory.

    The first-order state is not an exact eigenstate, so the kinetic ratio plus
    the true potential is *not* constant.  ``energy`` is the first-order energy.
    """

    kind = "ParticleInBoxPerturbed"

    def __init__(self, n=1, strength=10.0, n_basis=20, length=1.0, constants=UNIT):
        super().__init__(((0.0, length),), constants)
        self.state = PerturbedBoxState(n, n_basis, strength, length, constants)
        self.n, self.strength, self.n_basis = int(n), float(strength), int(n_basis)
        self.energy = self.state.unperturbed_energy(n) + self.state.matrix_element(n, n)

    @property
    def id(self):
        return f"pib:n={self.n}"

    def derivatives(self, x):
        return self.state.derivatives(x)

    def potential(self, points):
        x = self.coords(points)[0]
        return self.strength * x**2

    def consistent_potential(self, points):
        """Potential for which the truncated state is exact: E - kinetic ratio."""
        return self.energy - self.kinetic_ratio(points)


# STO-3G hydrogen 1s contraction
STO3G_EXPONENTS = (3.42525091, 0.62391373, 0.16885540)
STO3G_COEFFICIENTS = (0.15432897, 0.53532814, 0.44463454)


class H2Density(Stationary1D):
    """Model H2 one-electron density along the bond axis.

    |psi| is the symmetric sum of two STO-3G 1s contractions centred at +-R/2
    (R = 1.346 Angstrom in bohr), normalised so the density integrates to one
    over the domain.  The reference potential is E - kinetic_ratio with E chosen
    so that V vanishes at x = R.
    """

    kind = "H2"

    def __init__(self, bond_length_angstrom=1.346, domain=((-3.0, 3.0),), constants=UNIT):
        super().__init__(domain, constants)
        self.bond_length = bond_length_angstrom * BOHR_PER_ANGSTROM
        self.centers = (-0.5 * self.bond_length, 0.5 * self.bond_length)
        self.alphas = np.array(STO3G_EXPONENTS)
        self.coefs = np.array(STO3G_COEFFICIENTS) * (2 * self.alphas / math.pi) ** 0.75
        self.norm = 1.0
        lo, hi = self.domain[0]
        z = integrate(lambda x: self.derivatives(x)[0] ** 2, lo, hi, tol=1e-13)
        self.norm = 1.0 / math.sqrt(z)
        self.reference_point = self.bond_length
        self.energy = float(self.kinetic_ratio(np.array([self.reference_point]))[0])

    @property
    def id(self):
        return "h2"

    def derivatives(self, x):
        x = np.asarray(x, dtype=float)
        out = [np.zeros_like(x) for _ in range(4)]
        for center in self.centers:
            u = x - center
            for a, c in zip(self.alphas, self.coefs):
                g = c * np.exp(-a * u**2)
                out[0] += g
                out[1] += -2 * a * u * g
                out[2] += (4 * a**2 * u**2 - 2 * a) * g
                out[3] += (12 * a**2 * u - 8 * a**3 * u**3) * g
        return tuple(self.norm * d for d in out)

    def density(self, points):
        return self.psi(points) ** 2

    def potential(self, points):
        return self.energy - self.kinetic_ratio(points)


@lru_cache(maxsize=1)
def _default_h2():
    return H2Density()


def h2_density(x):
    """Normalised model H2 density on [-3, 3] (bohr)."""
    return _default_h2().density(x)


class Soliton(System):
    """psi = 2 sech(sqrt2 (x - 2t)) exp(i(x + t)) solving i psi_t + psi_xx + |psi|^2 psi = 0.

    Points are (x, t).  The governing equation carries coefficient 1 on psi_xx and
    +U psi, so the TDSE target is U = -Re[(i psi_t + psi_xx) / psi].
    """

    kind = "Soliton"
    dim = 2
    stationary = False
    tdse_kinetic = 1.0
    tdse_sign = -1.0

    def __init__(self, domain=((0.0, 1.0), (0.0, 1.0))):
        super().__init__(domain)

    @property
    def id(self):
        return "soliton"

    def _envelope(self, points):
        x, t = self.coords(points)
        xi = math.sqrt(2.0) * (x - 2 * t)
        sech, tanh = 1.0 / np.cosh(xi), np.tanh(xi)
        a = 2 * sech
        da = -2 * sech * tanh
        d2a = 2 * sech * (1 - 2 * sech**2)
        return a, da, d2a, np.exp(1j * (x + t))

    def psi(self, points):
        a, _, _, phase = self._envelope(points)
        return a * phase

    def tdse_terms(self, points):
        """(psi, psi_t, psi_xx) as complex arrays."""
        a, da, d2a, phase = self._envelope(points)
        r2 = math.sqrt(2.0)
        psi_t = (-2 * r2 * da + 1j * a) * phase
        psi_xx = (2 * d2a + 2j * r2 * da - a) * phase
        return a * phase, psi_t, psi_xx

    def potential(self, points):
        return np.abs(self.psi(points)) ** 2


# ---------------------------------------------------------------- registry

_ID_RE = re.compile(r"^([a-z0-9-]+)(?::(.*))?$")


def _parse_args(text):
    out = {}
    if not text:
        return out
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise ConfigError(f"malformed system parameter {part!r}")
        out[key.strip()] = int(value) if re.fullmatch(r"-?\d+", value.strip()) else float(value)
    return out


def _wigner_ho(**kw):
    from .wigner import WignerHO

    return WignerHO(**kw)


def _wigner_pt(**kw):
    from .wigner import WignerPT

    return WignerPT(**kw)


SYSTEMS = {
    "ho1d": (HarmonicOscillator1D, {"n": "n"}, "ho1d:n=0"),
    "pt": (PoschlTeller, {"l": "lam", "mu": "mu"}, "pt:l=2,mu=1"),
    "h": (HydrogenRadial, {"n": "n", "l": "l"}, "h:n=2,l=1"),
    "ho2d": (HarmonicOscillator2D, {"nx": "nx", "ny": "ny"}, "ho2d:nx=0,ny=0"),
    "pib": (ParticleInBoxPerturbed, {"n": "n", "v": "strength", "basis": "n_basis"}, "pib:n=1"),
    "h2": (H2Density, {}, "h2"),
    "soliton": (Soliton, {}, "soliton"),
    "wigner-ho": (_wigner_ho, {}, "wigner-ho"),
    "wigner-pt": (_wigner_pt, {}, "wigner-pt"),
}


def system_ids():
    """Canonical example id for every registered system family."""
    return [entry[2] for entry in SYSTEMS.values()]


def get_system(system_id):
    """Resolve a string id such as ``"pt:l=2,mu=1"`` to a system instance."""
    m = _ID_RE.match(system_id.strip())
    if not m or m.group(1) not in SYSTEMS:
        raise ConfigError(f"unknown system id {system_id!r}; valid ids: {', '.join(system_ids())}")
    factory, names, _ = SYSTEMS[m.group(1)]
    kwargs = {}
    for key, value in _parse_args(m.group(2)).items():
        if key not in names:
            raise ConfigError(f"unknown parameter {key!r} for {m.group(1)}")
        kwargs[names[key]] = value
    return factory(**kwargs)


# ------------------------------------------------------ functional surface


def eval_psi(system, point):
    system.check_domain(point)
    return system.psi(point)


def true_potential(system, point):
    system.check_domain(point)
    return system.potential(point)


def kinetic_ratio(system, point):
    system.check_domain(point)
    return system.kinetic_ratio(point)
