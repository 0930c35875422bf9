import numpy as np
import pytest
from hypothesis import given, strategies as st

from sslab import extdyn
from sslab.cocycle import CentralExtensionElement, bargmann, extension_compose
from sslab.galilei import GalileiElement, random_rotation
from sslab.systems import GravitationalPair, HarmonicPair, SystemSpec


def harmonic_pair():
    spec = SystemSpec([1.0, 2.0], 2, potential=HarmonicPair(1.0))
    s0 = extdyn.ExtendedState([[0.5, 0.0], [-0.5, 0.2]], [[0.3, 0.1], [-0.1, 0.4]],
                              [0.0, 0.1], [1.0, 2.0])
    return spec, s0


@pytest.fixture(scope="module")
def traj():
    spec, s0 = harmonic_pair()
    return spec, extdyn.integrate(s0, spec, 1.0, 1e-3)


def element(theta=0.0, v=(0.0, 0.0), a=(0.0, 0.0), b=0.0, R=None):
    return CentralExtensionElement(theta, GalileiElement(np.eye(2) if R is None else R, v, a, b))


class TestDerivatives:
    def test_free_lambda_rate(self):
        s = extdyn.ExtendedState([[0.0]], [[2.0]], [0.0], [1.0])
        tan = extdyn.derivatives(s, SystemSpec([1.0], 1))
        assert tan.lam[0] == -2.0
        assert tan.x[0, 0] == 2.0 and tan.m[0] == 0.0

    def test_gravitational_mass_term(self):
        spec = SystemSpec([1.0, 3.0], 1, potential=GravitationalPair(G=2.0))
        s = extdyn.ExtendedState([[0.0], [4.0]], [[1.0], [0.0]], [0.0, 0.0], [1.0, 3.0])
        tan = extdyn.derivatives(s, spec)
        assert tan.lam[0] == pytest.approx(-2.0 * 3.0 / 4.0 - 0.5)
        assert tan.lam[1] == pytest.approx(-2.0 * 1.0 / 4.0)

    def test_mass_independent_potential(self):
        spec, s0 = harmonic_pair()
        tan = extdyn.derivatives(s0, spec)
        np.testing.assert_array_equal(tan.lam, -np.sum(s0.p ** 2, axis=1) / (2 * s0.m ** 2))

    def test_nonpositive_mass_rejected(self):
        with pytest.raises(ValueError):
            extdyn.ExtendedState([[0.0]], [[1.0]], [0.0], [0.0])


class TestIntegrate:
    def test_free_particle_lambda(self):
        s = extdyn.ExtendedState([[0.0]], [[2.0]], [0.0], [1.0])
        tr = extdyn.integrate(s, SystemSpec([1.0], 1), 1.0, 0.01)
        assert tr.lam[-1, 0] == pytest.approx(-2.0, abs=1e-12)

    def test_masses_untouched(self, traj):
        spec, tr = traj
        np.testing.assert_array_equal(tr.m, [1.0, 2.0])

    def test_energy_conserved(self, traj):
        spec, tr = traj
        E = [extdyn.energy(tr.state(i), spec) for i in range(len(tr))]
        assert np.ptp(E) < 1e-9

    def test_fourth_order_convergence(self):
        spec, s0 = harmonic_pair()
        dts = [0.04, 0.02, 0.01]
        errs = []
        for h in dts:
            coarse = extdyn.integrate(s0, spec, 1.0, h)
            fine = extdyn.integrate(s0, spec, 1.0, h / 2)
            errs.append(coarse.max_distance(fine))
        slopes = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(np.abs(slopes - 4.0) < 0.2)

    def test_small_step_accuracy(self, traj):
        spec, tr = traj
        _, s0 = harmonic_pair()
        half = extdyn.integrate(s0, spec, 1.0, 5e-4)
        assert tr.max_distance(half) < 1e-8

    def test_large_step_rejected(self):
        spec, s0 = harmonic_pair()
        with pytest.raises(extdyn.StepRejected):
            extdyn.integrate(s0, spec, 2.0, 0.5)


class TestGroupAction:
    def test_central_element_shifts_lambda(self, traj):
        _, tr = traj
        out = extdyn.apply_extended_group(element(theta=0.6), tr)
        np.testing.assert_allclose(out.lam, tr.lam - 0.6 / 3.0, atol=1e-15)
        np.testing.assert_array_equal(out.x, tr.x)
        np.testing.assert_array_equal(out.p, tr.p)

    def test_translation_leaves_lambda(self, traj):
        _, tr = traj
        out = extdyn.apply_extended_group(element(a=(0.3, -0.2)), tr)
        np.testing.assert_array_equal(out.lam, tr.lam)
        np.testing.assert_allclose(out.x, tr.x + [0.3, -0.2])

    def test_boost_changes_momenta(self, traj):
        _, tr = traj
        out = extdyn.apply_extended_group(element(v=(0.5, 0.0)), tr)
        np.testing.assert_allclose(out.p[:, 1], tr.p[:, 1] + [1.0, 0.0])

    def test_composition_on_grid(self, traj):
        spec, tr = traj
        xi = bargmann(float(tr.m.sum()))
        R = random_rotation(np.random.default_rng(1), 2)
        e1 = element(0.3, (0.2, -0.1), (0.4, 0.1), 0.1, R)
        e2 = element(-0.5, (-0.3, 0.25), (0.1, -0.2), 0.05)
        direct = extdyn.apply_extended_group(extension_compose(e1, e2, xi), tr)
        chained = extdyn.apply_extended_group(e1, extdyn.apply_extended_group(e2, tr))
        assert direct.max_distance(chained) < 1e-10

    def test_window_too_short(self, traj):
        _, tr = traj
        with pytest.raises(ValueError):
            extdyn.apply_extended_group(element(b=1.5), tr)


class TestSymmetry:
    def test_identity_gives_raw_residual(self, traj):
        spec, tr = traj
        assert extdyn.verify_symmetry(element(), tr, spec) == extdyn.eom_residual(tr, spec)

    def test_random_element(self, traj):
        spec, tr = traj
        rng = np.random.default_rng(3)
        gbar = element(0.7, rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2), 0.2,
                       random_rotation(rng, 2))
        assert extdyn.verify_symmetry(gbar, tr, spec) < 1e-6

    def test_residual_shrinks_sixteenfold(self):
        spec, s0 = harmonic_pair()
        gbar = element(0.7, (0.3, -0.2), (0.1, 0.4), 0.2)
        r = [extdyn.verify_symmetry(gbar, extdyn.integrate(s0, spec, 2.0, h), spec)
             for h in (0.04, 0.02)]
        assert 12.0 < r[0] / r[1] < 20.0

    def test_bare_galilei_map_is_not_a_symmetry(self, traj):
        spec, tr = traj
        gbar = element(0.0, (0.5, 0.3), (0.0, 0.0), 0.0)
        bare = extdyn.verify_symmetry(gbar, tr, spec, compensate=False)
        assert bare > 0.1
        assert bare > 1e6 * extdyn.verify_symmetry(gbar, tr, spec)


class TestActionCost:
    def test_constant_mass(self):
        t = np.linspace(0, 1, 101)
        assert extdyn.action_cost_series(t, 0.5 * t ** 2, 3.0) == pytest.approx(1.5, abs=1e-9)

    def test_closed_loop(self):
        t = np.linspace(0, 2 * np.pi, 201)
        assert abs(extdyn.action_cost_series(t, np.sin(t) ** 2 + 0.3, 2.0)) < 1e-9

    def test_free_particle(self):
        s = extdyn.ExtendedState([[0.0]], [[0.8]], [0.25], [1.5])
        tr = extdyn.integrate(s, SystemSpec([1.5], 1), 2.0, 0.01)
        assert extdyn.action_cost(tr) == pytest.approx(-1.5 * 0.8 ** 2 * 2.0 / (2 * 1.5 ** 2), abs=1e-9)


class TestChart:
    def test_two_particles(self):
        c = extdyn.to_canonical_chart([1.0, 4.0], [1.0, 3.0])
        assert (c.Lambda, c.M) == (1.0, 4.0)
        np.testing.assert_array_equal(c.lam_rel, [3.0])
        np.testing.assert_array_equal(c.m_rel, [3.0])

    def test_total_mass_generates_uniform_shift(self):
        lam, m = np.array([0.2, -1.0, 0.7]), np.array([1.0, 2.0, 0.5])
        M = lambda lam_, m_: float(np.sum(m_))
        for i in range(3):
            li = lambda lam_, m_, i=i: float(lam_[i])
            assert extdyn.poisson_bracket_fd(li, M, lam, m) == pytest.approx(1.0, abs=1e-8)


@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 4))
def test_chart_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    lam, m = rng.normal(size=n), rng.uniform(0.1, 3, n)
    back_lam, back_m = extdyn.from_canonical_chart(extdyn.to_canonical_chart(lam, m))
    np.testing.assert_allclose(back_lam, lam, atol=1e-14)
    np.testing.assert_allclose(back_m, m, atol=1e-14)


@given(seed=st.integers(0, 2**31 - 1), M=st.floats(0.1, 10.0))
def test_action_cost_depends_only_on_endpoints(seed, M):
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, 64)
    wiggle = np.cumsum(rng.normal(size=t.size))
    wiggle -= np.linspace(wiggle[0], wiggle[-1], t.size)
    base = 0.3 + 1.2 * t
    a = extdyn.action_cost_series(t, base, M)
    b = extdyn.action_cost_series(t, base + wiggle, M)
    assert abs(a - b) < 1e-9 * max(1.0, M)
