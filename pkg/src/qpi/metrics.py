"""RK4 reference inversion, RMSE metrics and energy-constancy diagnostics."""

from dataclasses import dataclass, field

import numpy as np

from .catalog import NODAL_EPSILON
from .errors import ConfigError, NodalPointError

DEFAULT_GRID = 201
ANCHOR_OFFSET = 1e-4  # half-width of the symmetric limit used at a nodal anchor


def rmse(a, b):
    """Root mean square difference of two equal-length samples."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise ConfigError(f"rmse needs equal lengths, got {a.size} and {b.size}")
    if a.size == 0:
        raise ConfigError("rmse needs at least one sample")
    d = a - b
    return float(np.sqrt(np.mean(d * d)))


def evaluation_grid(system, count=DEFAULT_GRID):
    """Uniform grid over the domain with near-nodal points dropped.

    1D systems give shape (M,); higher-dimensional ones a tensor grid of shape
    (M, dim) with the first coordinate varying slowest.
    """
    if count < 2:
        raise ConfigError("grid needs at least two points per dimension")
    axes = [np.linspace(lo, hi, count) for lo, hi in system.domain[: system.dim]]
    if system.dim == 1:
        pts = axes[0]
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
    if system.has_amplitude:
        pts = pts[np.abs(system.amplitude(pts)) >= NODAL_EPSILON]
    return pts


def grid_spec(system, count):
    return [[lo, hi, int(count)] for lo, hi in system.domain[: system.dim]]


def _rhs(system, x):
    return -system.kinetic_ratio_grad(np.atleast_1d(x))[..., 0]


def _anchor_rhs(system, x0):
    """Right-hand side at the anchor; a node there is a removable singularity."""
    if abs(system.psi(np.array([x0]))[0]) >= NODAL_EPSILON:
        return _rhs(system, x0)[0]
    h = ANCHOR_OFFSET
    return 0.5 * (_rhs(system, x0 - h)[0] + _rhs(system, x0 + h)[0])


def _march(system, xs, y0, f0):
    """Classical RK4 for U' = f(x) along the nodes ``xs`` (either direction)."""
    out = np.empty(len(xs))
    out[0] = y0
    if len(xs) == 1:
        return out
    starts, ends = xs[:-1], xs[1:]
    h = ends - starts
    k_start = _rhs(system, starts[1:]) if len(starts) > 1 else np.empty(0)
    k1 = np.concatenate([[f0], k_start])
    k23 = _rhs(system, starts + 0.5 * h)
    k4 = _rhs(system, ends)
    # f does not depend on U, so the four stages collapse to Simpson weights
    increments = h * (k1 + 4 * k23 + k4) / 6.0
    out[1:] = y0 + np.cumsum(increments)
    return out


def rk4_invert(system, grid, ic):
    """Integrate U'(x) = -d/dx kinetic_ratio(x) from ``ic = (x0, y0)`` over ``grid``.

    The grid is sorted and ``x0`` is merged into it, then RK4 runs outwards in
    both directions.  Returns U at the original grid points.  A node anywhere
    other than the anchor raises NodalPointError; split the grid there.
    """
    if not system.stationary or system.dim != 1:
        raise ConfigError(f"RK4 inversion needs a 1D stationary system, got {system.id}")
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ConfigError("RK4 grid must be strictly increasing")
    x0, y0 = float(ic[0]), float(ic[1])
    lo, hi = system.domain[0]
    if not lo <= x0 <= hi:
        raise ConfigError(f"initial-condition point {x0} outside {system.id} domain")
    nodes = np.union1d(grid, [x0])
    i0 = int(np.searchsorted(nodes, x0))
    f0 = _anchor_rhs(system, x0)
    right = _march(system, nodes[i0:], y0, f0)
    left = _march(system, nodes[i0::-1], y0, f0)[::-1]
    full = np.concatenate([left[:-1], right])
    return full[np.searchsorted(nodes, grid)]


def _evaluate(potential, points):
    if hasattr(potential, "taylor"):
        return potential.taylor(points, 0)[0][0]
    return np.asarray(potential(points), dtype=float)


def energy_curve(potential, system, grid):
    """Rows (coordinates..., kinetic_ratio + U) over ``grid``.

    ``potential`` may be a network, an OraclePotential, a callable or an
    array of precomputed values on the grid.
    """
    pts = np.asarray(grid, dtype=float)
    if isinstance(potential, np.ndarray):
        u = potential.reshape(len(pts))
    else:
        u = _evaluate(potential, pts)
    e = system.kinetic_ratio(pts) + u
    return np.column_stack([pts.reshape(len(pts), -1), e])


@dataclass
class MetricsReport:
    rmse_potential: float
    rmse_energy: float = None
    energy_curve: np.ndarray = None
    grid: list = field(default_factory=list)
    method: str = "QPNN"
    seed_list: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("QPNN", "RK4"):
            raise ConfigError(f"unknown method {self.method!r}")

    def to_json(self):
        out = {
            "rmse_potential": self.rmse_potential,
            "rmse_energy": self.rmse_energy,
            "grid": self.grid,
            "method": self.method,
            "seed_list": list(self.seed_list),
        }
        out.update(self.metadata)
        return out


def _potential_points(system, grid):
    # Wigner systems are sampled in phase space but the potential lives on x
    return grid if system.has_amplitude or np.ndim(grid) == 1 else grid[:, 0]


def build_report(potential, system, grid=None, count=DEFAULT_GRID, method="QPNN", seeds=(), values=None):
    """Potential RMSE against the closed form and, for stationary systems,
    energy-curve RMSE against the exact constant energy.

    ``values`` overrides evaluation of ``potential`` (used for RK4 samples).
    """
    pts = evaluation_grid(system, count) if grid is None else np.asarray(grid, dtype=float)
    u = _evaluate(potential, pts) if values is None else np.asarray(values, dtype=float).reshape(len(pts))
    report = MetricsReport(rmse(u, system.potential(pts)), grid=grid_spec(system, count), method=method, seed_list=list(seeds))
    if system.stationary and system.energy is not None:
        try:
            curve = energy_curve(u, system, pts)
        except NodalPointError:
            keep = np.abs(system.amplitude(pts)) >= NODAL_EPSILON
            curve = energy_curve(u[keep], system, pts[keep])
        report.energy_curve = curve
        report.rmse_energy = rmse(curve[:, -1], np.full(len(curve), system.energy))
    return report


def aggregate(values):
    """Mean and sample standard deviation (ddof=1) of per-seed values."""
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if v.size < 2:
        return {"mean": float(v.mean()) if v.size else None, "std": None}
    return {"mean": float(v.mean()), "std": float(v.std(ddof=1))}
