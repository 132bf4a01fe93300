"""Physics-informed residual losses and their exact parameter gradients.

A loss sees potentials (and the PIB wave network) only through three calls:
``taylor(points, order)``, ``partials(points)`` and ``grad(cache, cotangent)``.
``MlpParams`` implements them with the jet engine; ``OraclePotential`` wraps a
closed form so any loss can be evaluated at the true potential.
"""

import math
from dataclasses import dataclass

import numpy as np

from .catalog import NODAL_EPSILON, ParticleInBoxPerturbed
from .errors import ConfigError, NodalPointError
from .jets import Dual2D, Jet3

LOSS_KINDS = ("tise", "tdse", "wigner", "supervised_pib")


class OraclePotential:
    """Parameter-free potential defined by a closed form.

    ``fn`` is written with ordinary arithmetic (``x * x / 2``, ``.tanh()``...)
    and is evaluated on ``Jet3`` (one input) or ``Dual2D`` (two inputs) to get
    exact derivatives.
    """

    def __init__(self, fn, input_dim=1):
        self.fn = fn
        self.input_dim = input_dim

    def _coords(self, points):
        p = np.asarray(points, dtype=float)
        if self.input_dim == 1:
            return (p.reshape(-1),)
        return tuple(p[:, i] for i in range(self.input_dim))

    def taylor(self, points, order, direction=None):
        cs = self._coords(points)
        if self.input_dim == 1:
            jet = self.fn(Jet3.variable(cs[0]))
            if not isinstance(jet, Jet3):
                jet = Jet3.constant(jet)
            stack = np.stack([np.broadcast_to(c, cs[0].shape) for c in jet.coefficients])
            return stack[: order + 1].astype(float), None
        if order:
            raise ConfigError("oracle taylor beyond order 0 needs a single input")
        return np.asarray(self.fn(*cs), dtype=float)[None], None

    def partials(self, points):
        cs = self._coords(points)
        if self.input_dim == 1:
            return self.taylor(points, 1)
        out = self.fn(Dual2D.seed_x(cs[0]), Dual2D.seed_y(cs[1]))
        if not isinstance(out, Dual2D):
            out = Dual2D(out)
        stack = np.stack([np.broadcast_to(v, cs[0].shape) for v in (out.value, out.dx, out.dy)])
        return stack.astype(float), None

    def grad(self, cache, cotangent):
        return np.zeros(0)

    def __call__(self, points):
        return self.taylor(points, 0)[0][0]


@dataclass
class LossSpec:
    kind: str = "tise"
    ic: tuple = None  # (point, target value)
    ic_weight: float = 1.0
    order: int = 0  # Wigner-Moyal truncation k
    moyal_factorial: bool = True  # 1/(2s+1)! versus the literal 1/(2s+1)
    moyal_sign: float = -1.0  # sign multiplying hbar^2 in the s-th term

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigError(f"loss kind must be one of {LOSS_KINDS}, got {self.kind!r}")
        if self.kind == "wigner" and self.order not in (0, 1):
            raise ConfigError("Wigner-Moyal truncation order must be 0 or 1")


def _with_ic(points, ic):
    if ic is None:
        return points
    anchor = np.asarray(ic[0], dtype=float).reshape(1, -1)
    return np.concatenate([points, anchor], axis=0)


def _as_2d(points):
    p = np.asarray(points, dtype=float)
    return p[:, None] if p.ndim == 1 else p


def tise_loss(potential, system, points, ic=None, ic_weight=1.0, kinetic_grad=None, with_grad=False):
    """Mean squared gradient of (kinetic ratio + U) plus the initial-condition penalty."""
    pts = _as_2d(points)
    n = len(pts)
    kg = system.kinetic_ratio_grad(pts) if kinetic_grad is None else np.asarray(kinetic_grad).reshape(n, -1)
    allpts = _with_ic(pts, ic)
    if kg.shape[1] == 1:
        stack, cache = potential.taylor(allpts, 1)
    else:
        stack, cache = potential.partials(allpts)
    r = kg + stack[1:, :n].T
    value = float(np.mean(np.sum(r * r, axis=1)))
    cot = np.zeros_like(stack)
    cot[1:, :n] = (2.0 / n) * r.T
    if ic is not None:
        diff = stack[0, n] - ic[1]
        value += ic_weight * diff**2
        cot[0, n] = 2.0 * ic_weight * diff
    if not with_grad:
        return value
    return value, potential.grad(cache, cot)


def tdse_target(system, points):
    """sign * Re[(i psi_t + kappa psi_xx) / psi], with (kappa, sign) carried by the system."""
    psi, psi_t, psi_xx = system.tdse_terms(points)
    mod2 = np.abs(psi) ** 2
    if np.any(mod2 < NODAL_EPSILON**2):
        raise NodalPointError("|psi|^2 below threshold in TDSE target")
    num = (1j * psi_t + system.tdse_kinetic * psi_xx) * np.conj(psi)
    return system.tdse_sign * num.real / mod2


def tdse_loss(potential, system, points, target=None, with_grad=False):
    pts = _as_2d(points)
    n = len(pts)
    target = tdse_target(system, pts) if target is None else np.asarray(target).reshape(n)
    stack, cache = potential.taylor(pts, 0)
    diff = target - stack[0]
    value = float(np.mean(diff * diff))
    if not with_grad:
        return value
    cot = (-2.0 / n) * diff[None]
    return value, potential.grad(cache, cot)


def moyal_coefficients(order, hbar=1.0, factorial=True, sign=-1.0):
    """Weight of U^(2s+1) d_p^(2s+1) W for s = 0..order."""
    out = []
    for s in range(order + 1):
        denom = math.factorial(2 * s + 1) if factorial else 2 * s + 1
        out.append((sign * hbar**2) ** s * 0.25**s / denom)
    return out


def wigner_moyal_loss(potential, field_partials, points, order=0, ic=None, ic_weight=1.0, mass=1.0,
                      coefficients=None, with_grad=False):
    """Mean squared residual of the truncated Wigner-Moyal equation.

    ``points`` are (x, p, t); ``field_partials`` rows hold (W_t, W_x, W_p, W_ppp).
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    fp = np.asarray(field_partials, dtype=float).reshape(n, 4)
    coeffs = coefficients or moyal_coefficients(order)
    x = pts[:, 0:1]
    tay_order = 2 * (len(coeffs) - 1) + 1
    allx = _with_ic(x, ic)
    stack, cache = potential.taylor(allx, tay_order)
    r = fp[:, 0] + pts[:, 1] / mass * fp[:, 1]
    w_derivs = {1: fp[:, 2], 3: fp[:, 3]}
    for s, c in enumerate(coeffs):
        r = r - c * stack[2 * s + 1, :n] * w_derivs[2 * s + 1]
    value = float(np.mean(r * r))
    cot = np.zeros_like(stack)
    for s, c in enumerate(coeffs):
        cot[2 * s + 1, :n] = (-2.0 / n) * r * c * w_derivs[2 * s + 1]
    if ic is not None:
        diff = stack[0, n] - ic[1]
        value += ic_weight * diff**2
        cot[0, n] = 2.0 * ic_weight * diff
    if not with_grad:
        return value
    return value, potential.grad(cache, cot)


def supervised_pib_loss(potential, wave, points, target, kinetic=0.5, with_grad=False):
    """||W - psi_pert||^2 plus the TISE residual with the kinetic ratio taken from W's own jet.

    Returns gradients as ``(grad_potential, grad_wave)``.
    """
    pts = _as_2d(points)
    n = len(pts)
    target = np.asarray(target, dtype=float).reshape(n)
    w, wcache = wave.taylor(pts, 3)
    w0, w1, w2, w3 = w
    if np.any(np.abs(w0) < NODAL_EPSILON):
        raise NodalPointError("wave network vanishes at a sample")
    u, ucache = potential.taylor(pts, 1)
    miss = w0 - target
    kg = -kinetic * (w3 * w0 - w2 * w1) / w0**2
    r = kg + u[1]
    value = float(np.mean(miss * miss) + np.mean(r * r))
    if not with_grad:
        return value
    dr = (2.0 / n) * r
    ucot = np.zeros_like(u)
    ucot[1] = dr
    wcot = np.empty_like(w)
    wcot[0] = (2.0 / n) * miss + dr * (-kinetic) * (2 * w2 * w1 - w3 * w0) / w0**3
    wcot[1] = dr * kinetic * w2 / w0**2
    wcot[2] = dr * kinetic * w1 / w0**2
    wcot[3] = dr * (-kinetic) / w0
    return value, (potential.grad(ucache, ucot), wave.grad(wcache, wcot))


class Objective:
    """Binds a LossSpec to a system for the trainer.

    ``prepare`` precomputes everything that depends only on the sample points
    (kinetic-ratio gradients, TDSE targets, Wigner partials, PIB targets) so
    each optimisation step only evaluates the networks.
    """

    def __init__(self, spec, system):
        self.spec, self.system = spec, system
        kind = spec.kind
        if kind == "tise" and not system.stationary:
            raise ConfigError(f"TISE loss needs a stationary system, got {system.id}")
        if kind == "tdse" and not hasattr(system, "tdse_terms"):
            raise ConfigError(f"TDSE loss needs a time-dependent amplitude, got {system.id}")
        if kind == "wigner" and not hasattr(system, "partials"):
            raise ConfigError(f"Wigner loss needs a Wigner field, got {system.id}")
        if kind == "supervised_pib" and not isinstance(system, ParticleInBoxPerturbed):
            raise ConfigError("supervised PIB loss needs the perturbed particle-in-a-box system")
        self.n_models = 2 if kind == "supervised_pib" else 1
        if kind == "wigner":
            self.coefficients = moyal_coefficients(spec.order, system.constants.hbar, spec.moyal_factorial, spec.moyal_sign)

    def prepare(self, points):
        kind, system = self.spec.kind, self.system
        if kind == "tise":
            return system.kinetic_ratio_grad(points)
        if kind == "tdse":
            return tdse_target(system, points)[:, None]
        if kind == "wigner":
            return system.partials(points)
        return system.psi(points)[:, None]

    def __call__(self, models, points, aux, with_grad=True):
        s = self.spec
        if s.kind == "tise":
            out = tise_loss(models[0], self.system, points, s.ic, s.ic_weight, aux, with_grad)
        elif s.kind == "tdse":
            out = tdse_loss(models[0], self.system, points, aux, with_grad)
        elif s.kind == "wigner":
            out = wigner_moyal_loss(models[0], aux, points, s.order, s.ic, s.ic_weight,
                                    self.system.constants.mass, self.coefficients, with_grad)
        else:
            out = supervised_pib_loss(models[0], models[1], points, aux, self.system.constants.kinetic, with_grad)
            if with_grad:
                return out[0], out[1]
            return out
        if with_grad:
            return out[0], (out[1],)
        return out
