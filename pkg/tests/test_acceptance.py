"""End-to-end acceptance criteria A1-A7, each reported as one PASS/FAIL line.

The training criteria run the shipped presets at full length (several minutes
in total); A7 is a timed battery of the no-training property checks.
"""

import math
import time

import numpy as np
from scipy.integrate import quad

from conftest import ACCEPTANCE_LINES, central_diff, directional_check, rel_err, third_diff
from qpi.catalog import (
    HarmonicOscillator1D,
    HarmonicOscillator2D,
    HydrogenRadial,
    ParticleInBoxPerturbed,
    PoschlTeller,
    Soliton,
)
from qpi.cli import run_experiment
from qpi.config import from_preset
from qpi.jets import Jet3
from qpi.losses import OraclePotential, tdse_loss, tise_loss, wigner_moyal_loss
from qpi.metrics import energy_curve, evaluation_grid, rk4_invert, rmse
from qpi.network import forward, forward_jet, init_params, taylor
from qpi.wigner import WignerHO


def record(name, ok, detail):
    ACCEPTANCE_LINES.append((name, bool(ok), detail))
    print(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def train_preset(name, tmp_path):
    return run_experiment(from_preset(name), str(tmp_path / name))


def test_a1_harmonic_oscillator(tmp_path):
    r = train_preset("ho1d-tise", tmp_path)
    ok = r["rmse_potential"] <= 5e-2 and r["train_seconds"] <= 600
    record("A1", ok, f"ho1d-tise rmse_potential={r['rmse_potential']:.3e} (<= 5e-2), train {r['train_seconds']:.0f}s (<= 600s)")
    assert r["train_seconds"] <= 600
    assert r["rmse_potential"] <= 5e-2


def test_a2_poschl_teller(tmp_path):
    r = train_preset("pt-tise", tmp_path)
    ok = r["rmse_potential"] <= 1e-3 and r["rmse_energy"] <= 5e-3
    record("A2", ok, f"pt-tise rmse_potential={r['rmse_potential']:.3e} (<= 1e-3), rmse_energy={r['rmse_energy']:.3e} (<= 5e-3)")
    assert r["rmse_potential"] <= 1e-3
    assert r["rmse_energy"] <= 5e-3


def test_a3_rk4_baseline():
    ho = HarmonicOscillator1D(0)
    g = np.linspace(-5, 5, 401)
    e_ho = rmse(rk4_invert(ho, g, (0.0, 0.0)), ho.potential(g))
    pt = PoschlTeller(2, 1)
    g = np.linspace(-3, 3, 401)
    e_pt = rmse(rk4_invert(pt, g, (0.0, -3.0)), pt.potential(g))
    ok = e_ho <= 1e-2 and e_pt <= 1e-3
    record("A3", ok, f"RK4 rmse HO={e_ho:.3e} (<= 1e-2), PT={e_pt:.3e} (<= 1e-3)")
    assert e_ho <= 1e-2
    assert e_pt <= 1e-3


def test_a4_soliton(tmp_path):
    cfg = from_preset("soliton-tdse")
    assert cfg.grid == 51
    r = run_experiment(cfg, str(tmp_path / "soliton"))
    ok = r["rmse_potential"] <= 3e-1
    record("A4", ok, f"soliton-tdse rmse_potential={r['rmse_potential']:.3e} on 51x51 (<= 3e-1)")
    assert r["grid"] == [[0.0, 1.0, 51], [0.0, 1.0, 51]]
    assert r["rmse_potential"] <= 3e-1


def test_a5_wigner_ho(tmp_path):
    r = train_preset("ho-wigner", tmp_path)
    ok = r["rmse_potential"] <= 5e-3 and r["initial_condition"] == [0.0, 0.0]
    record("A5", ok, f"ho-wigner rmse_potential={r['rmse_potential']:.3e} (<= 5e-3)")
    assert r["initial_condition"] == [0.0, 0.0]
    assert r["rmse_potential"] <= 5e-3


def test_a6_hydrogen(tmp_path):
    r = train_preset("hydrogen-tise", tmp_path)
    ok = r["rmse_energy"] <= 5e-3 and r["grid"] == [[0.5, 10.0, 201]]
    record("A6", ok, f"hydrogen-tise rmse_energy={r['rmse_energy']:.3e} vs -0.125 on [0.5, 10] (<= 5e-3)")
    assert r["grid"] == [[0.5, 10.0, 201]]
    assert r["rmse_energy"] <= 5e-3


def _property_battery():
    """Every no-training invariant; returns {check: (value, bound)}."""
    rng = np.random.default_rng(2024)
    out = {}

    # zero-residual oracles for every loss
    ho, pt = HarmonicOscillator1D(0), PoschlTeller(2, 1)
    x = rng.uniform(-5, 5, 200)
    out["oracle tise ho"] = (tise_loss(OraclePotential(lambda z: 0.5 * z * z), ho, x), 1e-8)
    y = rng.uniform(0.05, 3, 200)
    pt_u = OraclePotential(lambda z: -3.0 * (1.0 - z.tanh() ** 2))
    out["oracle tise pt"] = (tise_loss(pt_u, pt, y, ic=(0.0, -3.0)), 1e-8)
    ho2 = OraclePotential(lambda a, b: 0.5 * (a * a + b * b), input_dim=2)
    out["oracle tise ho2d"] = (tise_loss(ho2, HarmonicOscillator2D(0, 0), rng.uniform(0, 1, (200, 2))), 1e-8)
    sol = Soliton()
    pts = rng.uniform(0, 1, (200, 2))
    out["oracle tdse"] = (tdse_loss(OraclePotential(lambda a, b: sol.potential(np.column_stack([a, b])), 2), sol, pts), 1e-8)
    wpts = rng.uniform(0, 1, (200, 3))
    out["oracle wigner ho"] = (
        wigner_moyal_loss(OraclePotential(lambda z: 0.5 * z * z), WignerHO().partials(wpts), wpts, ic=(0.0, 0.0)),
        1e-8,
    )

    # jets against finite differences
    worst = [0.0, 0.0, 0.0]
    for i in range(20):
        p = init_params(1, seed=300 + i, final_activation="sigmoid", final_scale=3.0)
        f = lambda z: forward(p, z)
        xs = rng.uniform(-3, 3, 8)
        jet = forward_jet(p, Jet3.variable(xs))
        worst[0] = max(worst[0], rel_err(jet.c1, central_diff(f, xs, 1e-4)))
        worst[1] = max(worst[1], rel_err(jet.c2, (f(xs + 1e-3) - 2 * f(xs) + f(xs - 1e-3)) / 1e-6))
        worst[2] = max(worst[2], rel_err(jet.c3, third_diff(f, xs, 1e-2)))
    out["jet order 1"] = (worst[0], 1e-6)
    out["jet order 2"] = (worst[1], 1e-5)
    out["jet order 3"] = (worst[2], 1e-3)

    # parameter gradients
    p = init_params(1, seed=5, final_activation="sigmoid", final_scale=12.5)
    xs = rng.uniform(-5, 5, 16)
    _, g = tise_loss(p, ho, xs, ic=(0.0, 0.0), with_grad=True)
    out["param grad tise"] = (directional_check(lambda f: tise_loss(p.with_flat(f), ho, xs, ic=(0.0, 0.0)), g, p.flat, rng), 1e-5)
    stack, cache = taylor(p, xs, 3)
    w = rng.standard_normal(stack.shape)
    gr = p.grad(cache, w)
    out["param grad jet"] = (directional_check(lambda f: float(np.sum(w * taylor(p.with_flat(f), xs, 3)[0])), gr, p.flat, rng), 1e-5)

    # constant energy for exact eigenstates
    for s in (ho, HarmonicOscillator1D(2), pt, HydrogenRadial(2, 1), HarmonicOscillator2D(0, 0)):
        g = evaluation_grid(s, 41)
        e = energy_curve(s.potential, s, g)[:, -1]
        out[f"energy constant {s.id}"] = (float(np.max(np.abs(e - s.energy))), 1e-8)

    # Liouville identity for the oscillator Wigner field
    w_t, w_x, w_p, _ = WignerHO().partials(wpts).T
    out["liouville"] = (float(np.max(np.abs(w_t + wpts[:, 1] * w_x - wpts[:, 0] * w_p))), 1e-10)

    # PIB first-order coefficients against quadrature
    state = ParticleInBoxPerturbed(1).state

    def psi0(k, z):
        return math.sqrt(2) * math.sin(k * math.pi * z)

    worst = 0.0
    for k, c in state.corrections.items():
        element = quad(lambda z: psi0(1, z) * 10 * z * z * psi0(k, z), 0, 1, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        worst = max(worst, abs(c - element / (state.unperturbed_energy(1) - state.unperturbed_energy(k))))
    out["pib coefficients"] = (worst, 1e-10)

    # RK4 step halving
    errs = []
    for n in (41, 81):
        g = np.linspace(0.5, 3, n)
        errs.append(np.max(np.abs(rk4_invert(pt, g, (0.5, float(pt.potential(0.5)))) - pt.potential(g))))
    order = math.log2(errs[0] / errs[1])
    out["rk4 order"] = (abs(order - 4.0), 0.25)
    return out


def test_a7_property_battery():
    start = time.perf_counter()
    results = _property_battery()
    elapsed = time.perf_counter() - start
    failed = [k for k, (v, bound) in results.items() if not v <= bound]
    ok = not failed and elapsed < 30
    record("A7", ok, f"{len(results)} property checks in {elapsed:.1f}s (< 30s); failed: {', '.join(failed) or 'none'}")
    assert elapsed < 30
    assert not failed, {k: results[k] for k in failed}

