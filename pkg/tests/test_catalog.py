import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import central_diff, rel_err
from qpi.catalog import (
    NODAL_EPSILON,
    H2Density,
    HarmonicOscillator1D,
    HarmonicOscillator2D,
    HydrogenRadial,
    ParticleInBoxPerturbed,
    PhysicalConstants,
    PoschlTeller,
    Soliton,
    eval_psi,
    get_system,
    h2_density,
    kinetic_ratio,
    perturbed_pib_wavefunction,
    system_ids,
    true_potential,
)
from qpi.errors import ConfigError, DomainError, NodalPointError

TISE_SYSTEMS = [
    (HarmonicOscillator1D(0), 0.5),
    (HarmonicOscillator1D(3), 3.5),
    (PoschlTeller(2, 1), -0.5),
    (PoschlTeller(1, 1), -0.5),
    (PoschlTeller(4, 2), -2.0),
    (HydrogenRadial(2, 1), -0.125),
    (HydrogenRadial(3, 1), -1 / 18),
    (HarmonicOscillator2D(0, 0), 1.0),
    (HarmonicOscillator2D(1, 2), 4.0),
]


def _random_points(system, n, rng):
    lo = np.array([a for a, _ in system.domain])
    hi = np.array([b for _, b in system.domain])
    pts = rng.uniform(lo, hi, size=(4 * n, len(lo)))
    if system.dim == 1:
        pts = pts[:, 0]
    pts = pts[np.abs(system.psi(pts)) >= 1e-3]
    return pts[:n]


class TestEvalPsi:
    def test_ho_ground_at_origin(self):
        assert eval_psi(HarmonicOscillator1D(0), 0.0) == pytest.approx(math.pi**-0.25, rel=1e-14)

    def test_soliton_at_origin(self):
        v = eval_psi(Soliton(), np.array([0.0, 0.0]))
        assert v.real == pytest.approx(2.0) and v.imag == pytest.approx(0.0)

    def test_pt_node_at_origin(self):
        assert eval_psi(PoschlTeller(2, 1), 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_real_valued_except_soliton(self):
        x = np.linspace(0.6, 2.9, 7)
        for system in (HarmonicOscillator1D(1), PoschlTeller(2, 1), HydrogenRadial(2, 1)):
            assert np.isrealobj(system.psi(x))
        assert np.iscomplexobj(Soliton().psi(np.c_[x / 3, x / 3]))

    def test_domain_violation(self):
        with pytest.raises(DomainError):
            eval_psi(HarmonicOscillator1D(0), 6.0)
        with pytest.raises(DomainError):
            eval_psi(HydrogenRadial(2, 1), 0.0)

    def test_hydrogen_rejects_nonpositive_domain(self):
        with pytest.raises(ConfigError):
            HydrogenRadial(2, 1, domain=((0.0, 10.0),))


class TestTruePotential:
    def test_ho(self):
        assert true_potential(HarmonicOscillator1D(0), 2.0) == pytest.approx(2.0)

    def test_pt(self):
        assert true_potential(PoschlTeller(2, 1), 0.0) == pytest.approx(-3.0)

    @pytest.mark.parametrize("t", [0.0, 0.2, 0.45])
    def test_soliton_on_crest(self, t):
        assert true_potential(Soliton(), np.array([2 * t, t])) == pytest.approx(4.0)

    def test_soliton_is_modulus_squared(self, rng):
        pts = rng.uniform(0, 1, size=(20, 2))
        s = Soliton()
        np.testing.assert_allclose(s.potential(pts), np.abs(s.psi(pts)) ** 2, rtol=1e-14)

    def test_hydrogen_effective_potential(self):
        r = np.array([0.7, 1.0, 2.0, 5.0])
        np.testing.assert_allclose(HydrogenRadial(2, 1).potential(r), 1 / r**2 - 1 / r, rtol=1e-14)


class TestKineticRatio:
    def test_ho_ground_at_origin(self):
        assert kinetic_ratio(HarmonicOscillator1D(0), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_pt_11_closed_form(self, rng):
        x = rng.uniform(-3, 3, 50)
        np.testing.assert_allclose(PoschlTeller(1, 1).kinetic_ratio(x), 1 / np.cosh(x) ** 2 - 0.5, atol=1e-14)

    def test_ho2d_ground_at_origin(self):
        assert kinetic_ratio(HarmonicOscillator2D(0, 0), np.array([0.0, 0.0])) == pytest.approx(1.0)

    def test_node_raises(self):
        with pytest.raises(NodalPointError):
            kinetic_ratio(PoschlTeller(2, 1), 0.0)
        with pytest.raises(NodalPointError):
            PoschlTeller(2, 1).kinetic_ratio_grad(np.array([1e-8]))

    @pytest.mark.parametrize("system,energy", TISE_SYSTEMS, ids=lambda v: getattr(v, "id", ""))
    def test_energy_constant(self, system, energy, rng):
        pts = _random_points(system, 200, rng)
        e = system.kinetic_ratio(pts) + system.potential(pts)
        assert np.max(np.abs(e - energy)) <= 1e-8
        assert system.energy == pytest.approx(energy, abs=1e-12)

    @pytest.mark.parametrize("system", [s for s, _ in TISE_SYSTEMS if s.dim == 1] + [H2Density()], ids=lambda s: s.id)
    def test_ratio_gradient_matches_fd(self, system, rng):
        x = _random_points(system, 30, rng)
        fd = central_diff(system.kinetic_ratio, x, 1e-5)
        assert rel_err(system.kinetic_ratio_grad(x)[:, 0], fd) <= 1e-6

    def test_ho2d_gradient_matches_fd(self, rng):
        s = HarmonicOscillator2D(1, 1)
        pts = _random_points(s, 30, rng)
        g = s.kinetic_ratio_grad(pts)
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1e-5
            fd = (s.kinetic_ratio(pts + e) - s.kinetic_ratio(pts - e)) / 2e-5
            assert rel_err(g[:, j], fd) <= 1e-6


@pytest.mark.parametrize(
    "system", [HarmonicOscillator1D(2), PoschlTeller(2, 1), HydrogenRadial(2, 1), H2Density(), ParticleInBoxPerturbed()],
    ids=lambda s: s.id,
)
def test_second_derivative_five_point(system, rng):
    x = _random_points(system, 40, rng)
    f = lambda y: system.derivatives(y)[0]
    h = 1e-3
    fd = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h**2)
    assert rel_err(fd, system.derivatives(x)[2]) <= 1e-6


def test_first_and_third_derivatives(rng):
    for system in (HarmonicOscillator1D(1), PoschlTeller(3, 2), HydrogenRadial(3, 1), H2Density()):
        x = _random_points(system, 20, rng)
        d = system.derivatives(x)
        assert rel_err(central_diff(lambda y: system.derivatives(y)[0], x, 1e-5), d[1]) <= 1e-7
        assert rel_err(central_diff(lambda y: system.derivatives(y)[2], x, 1e-5), d[3]) <= 1e-6


class TestNormalisation:
    def test_ho(self):
        for n in range(4):
            s = HarmonicOscillator1D(n)
            assert quad(lambda x: s.psi(np.array([x]))[0] ** 2, -np.inf, np.inf)[0] == pytest.approx(1.0, abs=1e-10)

    def test_hydrogen_radial_u(self):
        s = HydrogenRadial(2, 1)
        u2 = lambda r: (r**2 * np.exp(-r / 2)) ** 2
        norm = quad(u2, 0, np.inf)[0]
        r = np.array([0.5, 1.0, 3.0, 7.5])
        np.testing.assert_allclose(np.abs(s.psi(r)), r**2 * np.exp(-r / 2) / math.sqrt(norm), rtol=1e-12)


class TestConstantsScaling:
    @pytest.mark.parametrize("c", [PhysicalConstants(1.0, 1.0, 2.0), PhysicalConstants(1.5, 0.7, 1.3)])
    def test_energy_constant_with_units(self, c, rng):
        ho = HarmonicOscillator1D(1, constants=c)
        x = _random_points(ho, 100, rng)
        e = ho.kinetic_ratio(x) + ho.potential(x)
        assert np.ptp(e) <= 1e-10
        assert e[0] == pytest.approx(c.hbar * c.omega * 1.5)
        for s in (PoschlTeller(2, 1, constants=c), HydrogenRadial(2, 1, constants=c)):
            x = _random_points(s, 100, rng)
            e = s.kinetic_ratio(x) + s.potential(x)
            assert np.ptp(e) <= 1e-10
            assert e.mean() == pytest.approx(s.energy, abs=1e-10)

    def test_kinetic_prefactor(self):
        assert PhysicalConstants(2.0, 0.5, 1.0).kinetic == pytest.approx(4.0)


class TestPoschlTellerValidation:
    @pytest.mark.parametrize("lam,mu", [(0, 1), (2, 0), (2, 3)])
    def test_quantum_numbers(self, lam, mu):
        with pytest.raises(ConfigError):
            PoschlTeller(lam, mu)


class TestPerturbedBox:
    def test_unperturbed_ground_energy(self):
        st = perturbed_pib_wavefunction(1)
        assert st.unperturbed_energy(1) == pytest.approx(math.pi**2 / 2)
        assert st.unperturbed_energy(1) == pytest.approx(4.9348022, abs=1e-7)

    def test_c2_against_quadrature(self):
        st = perturbed_pib_wavefunction(1)
        psi0 = lambda k, x: math.sqrt(2) * math.sin(k * math.pi * x)
        element = quad(lambda x: psi0(1, x) * 10 * x**2 * psi0(2, x), 0, 1, epsabs=1e-13, epsrel=1e-13)[0]
        expected = element / (math.pi**2 / 2 - 4 * math.pi**2 / 2)
        assert st.corrections[2] == pytest.approx(expected, abs=1e-10)

    def test_all_coefficients_against_quadrature(self):
        st = perturbed_pib_wavefunction(2, n_basis=12)
        psi0 = lambda k, x: math.sqrt(2) * math.sin(k * math.pi * x)
        for k, c in st.corrections.items():
            element = quad(lambda x: psi0(2, x) * 10 * x**2 * psi0(k, x), 0, 1, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
            assert c == pytest.approx(element / (st.unperturbed_energy(2) - st.unperturbed_energy(k)), abs=1e-10)

    def test_diagonal_excluded(self):
        st = perturbed_pib_wavefunction(1, 20)
        assert 1 not in st.corrections
        assert sorted(st.corrections) == list(range(2, 21))

    def test_odd_parity_term_nonzero(self):
        assert perturbed_pib_wavefunction(1).corrections[3] != 0.0

    def test_basis_must_exceed_state(self):
        with pytest.raises(ConfigError):
            perturbed_pib_wavefunction(3, 3)

    def test_truncation_tail_small(self):
        """Each coefficient beyond k = 20 is below 1e-6; their sum peaks near 3e-6 by the wall."""
        wide = perturbed_pib_wavefunction(1, 200)
        assert max(abs(c) for k, c in wide.corrections.items() if k > 20) < 1e-6
        x = np.linspace(0.0, 1.0, 201)
        diff = wide(x) - perturbed_pib_wavefunction(1, 20)(x)
        assert np.max(np.abs(diff)) < 5e-6

    def test_zero_strength_is_unperturbed(self):
        st = perturbed_pib_wavefunction(1, 20, strength=0.0)
        assert all(c == 0.0 for c in st.corrections.values())
        x = np.linspace(0.1, 0.9, 9)
        np.testing.assert_allclose(st(x), math.sqrt(2) * np.sin(math.pi * x), atol=1e-15)

    def test_energy_curve_not_constant(self, rng):
        s = ParticleInBoxPerturbed()
        x = rng.uniform(0.02, 0.98, 200)
        assert np.std(s.kinetic_ratio(x) + s.potential(x)) > 1e-3


class TestH2:
    def test_symmetric(self, rng):
        x = rng.uniform(0, 3, 50)
        np.testing.assert_allclose(h2_density(x), h2_density(-x), rtol=0, atol=1e-14)

    def test_normalised(self):
        assert quad(lambda x: h2_density(np.array([x]))[0], -3, 3, limit=200)[0] == pytest.approx(1.0, abs=1e-3)

    def test_bimodal_near_nuclei(self):
        s = H2Density()
        x = np.linspace(-3, 3, 6001)
        d = h2_density(x)
        peaks = x[1:-1][(d[1:-1] > d[:-2]) & (d[1:-1] > d[2:])]
        assert len(peaks) == 2
        np.testing.assert_allclose(np.sort(peaks), [-s.bond_length / 2, s.bond_length / 2], atol=0.1)

    def test_reference_potential_zero(self):
        s = H2Density()
        assert s.potential(np.array([s.reference_point]))[0] == pytest.approx(0.0, abs=1e-12)
        assert s.bond_length == pytest.approx(1.346 / 0.529177210903)


class TestRegistry:
    def test_ids_resolve(self):
        for sid in system_ids():
            assert get_system(sid).id == sid

    def test_parameters(self):
        assert get_system("pt:l=3,mu=2").energy == pytest.approx(-2.0)
        assert get_system("ho1d:n=2").energy == pytest.approx(2.5)

    def test_unknown_lists_valid_ids(self):
        with pytest.raises(ConfigError, match="ho1d:n=0"):
            get_system("nope")

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            get_system("pt:l=2,nu=1")


def test_nodal_epsilon():
    assert NODAL_EPSILON == 1e-6
