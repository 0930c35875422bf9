import numpy as np
import pytest
from hypothesis import given, strategies as st

from sslab import vnalg
from sslab.maxwell import fields as F
from sslab.maxwell import quantum as Qm
from sslab.maxwell.lattice import LatticeGeometry, real_sph_harm, triangle_solid_angle

SQRT4PI = np.sqrt(4 * np.pi)


@pytest.fixture(scope="module")
def geo():
    return LatticeGeometry(radius=6, h=1.0, l_max=2)


@pytest.fixture(scope="module")
def blob_run(geo):
    src = F.oscillating_blob(geo, radius=3.0, amplitude=0.2, q0={(1, 0, 0): 0.5})
    state, ch = F.initial_state(geo, src)
    state = F.add_transverse_field(state, seed=2)
    return F.run(state, ch, "coulomb", 0.1, 200, record_every=10)


class TestLattice:
    def test_counts_are_consistent(self, geo):
        assert geo.grad.shape == (geo.n_links, geo.n_sites)
        assert geo.curl.shape == (geo.n_plaquettes, geo.n_links)
        assert np.all(np.linalg.norm(geo.sites, axis=1) <= geo.radius)

    def test_solid_angles_tile_sphere(self, geo):
        assert geo.weight_sum_error() < 1e-10
        assert np.all(geo.face_weights > 0)

    def test_octant_solid_angle(self):
        e = np.eye(3)
        w = triangle_solid_angle(e[[0]], e[[1]], e[[2]])
        assert w[0] == pytest.approx(np.pi / 2)

    def test_discrete_identities(self, geo):
        assert geo.div_curl_defect() < 1e-12
        assert geo.curl_grad_defect() < 1e-12

    def test_harmonic_quality(self, geo):
        assert geo.harmonic_gram_error() < 5e-2

    def test_harmonic_quality_improves_with_radius(self, geo):
        assert LatticeGeometry(radius=9).harmonic_gram_error() < geo.harmonic_gram_error()

    def test_real_harmonics_orthonormal(self):
        # Lebedev-free check: dense Fibonacci sphere quadrature
        n = 20000
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5 ** 0.5) * i
        d = np.column_stack([np.sqrt(1 - z ** 2) * np.cos(phi), np.sqrt(1 - z ** 2) * np.sin(phi), z])
        Y = np.stack([real_sph_harm(l, m, d) for l in range(3) for m in range(-l, l + 1)])
        gram = Y @ Y.T * 4 * np.pi / n
        np.testing.assert_allclose(gram, np.eye(9), atol=1e-3)

    def test_site_lookup(self, geo):
        assert geo.site_index((0, 0, 0)) >= 0
        assert geo.site_index((7, 0, 0)) < 0


class TestSources:
    def test_blob_satisfies_continuity(self, geo):
        src = F.oscillating_blob(geo, direction=(0, 0, 1))
        assert src.continuity_residual(0.3, 0.4) < 1e-12
        assert np.all(src.boundary_current() == 0)

    def test_blob_current_stays_inside(self, geo):
        src = F.oscillating_blob(geo, radius=3.0)
        r = np.linalg.norm(geo.link_midpoints, axis=1)
        assert np.all(src.j0[r >= 3.0] == 0)

    def test_charge_outside_ball(self, geo):
        with pytest.raises(ValueError):
            F.point_charges(geo, {(9, 0, 0): 1.0})

    def test_continuity_violation_detected(self, geo):
        src = F.no_sources(geo)
        src.drift = np.zeros(geo.n_sites)
        src.drift[0] = 1e-3
        state, ch = F.initial_state(geo, F.no_sources(geo))
        state.sources = src
        with pytest.raises(F.SourceContinuityError):
            F.step(state, ch, "temporal", 0.1)


class TestStep:
    def test_vacuum_stays_zero(self, geo):
        state, ch = F.vacuum_state(geo)
        stepper = F.Stepper(geo, "coulomb")
        for _ in range(5):
            state, ch = stepper.step(state, ch, 0.1)
        assert not state.A.any() and not state.E.any() and not ch.lam.any()

    def test_static_charge_persists(self, geo):
        state, ch = F.initial_state(geo, F.central_charge(geo))
        E0 = state.E.copy()
        out, _, _ = F.run(state, ch, "temporal", 0.1, 1000, record_every=1000)
        assert np.abs(out.E - E0).max() < 1e-10
        # temporal gauge: A = -t E0 grows, but stays a pure gradient
        assert np.abs(out.A + out.t * E0).max() < 1e-10
        assert np.abs(geo.curl @ out.A).max() < 1e-10

    def test_step_size_limit(self, geo):
        state, ch = F.vacuum_state(geo)
        with pytest.raises(ValueError):
            F.step(state, ch, "temporal", 0.6)

    def test_unknown_gauge(self, geo):
        with pytest.raises(ValueError):
            F.Stepper(geo, "lorenz")

    def test_temporal_gauge_keeps_lambda(self, geo):
        src = F.oscillating_blob(geo, radius=3.0, q0={(0, 0, 1): 1.0})
        state, ch = F.initial_state(geo, src)
        _, ch1, _ = F.run(state, ch, "temporal", 0.1, 50, record_every=50)
        assert not ch1.lam.any()

    def test_coulomb_potential_solves_poisson(self, geo):
        state, _ = F.initial_state(geo, F.central_charge(geo))
        stepper = F.Stepper(geo, "coulomb")
        phi = stepper.potential(state)
        K = geo.h ** 3 * (geo.grad.T @ geo.grad)
        rhs = state.rho - geo.boundary_div @ state.E_bnd
        assert np.abs(K @ phi - (rhs - rhs.mean())).max() < 1e-9
        assert abs(phi.mean()) < 1e-12


class TestConstraints:
    def test_initial_gauss_residual(self, geo):
        state, _ = F.initial_state(geo, F.oscillating_blob(geo, q0={(0, 1, 0): 2.0}))
        assert F.gauss_residual(state)[1] < 1e-12

    def test_injected_violation(self, geo):
        state, _ = F.initial_state(geo, F.central_charge(geo))
        bump = np.zeros(geo.n_sites)
        bump[5] = 0.25
        G, worst = F.gauss_residual(state, state.rho + bump)
        assert worst == pytest.approx(0.25, abs=1e-12)
        assert G[5] == pytest.approx(-0.25, abs=1e-12)

    def test_drifts_stay_at_roundoff(self, blob_run):
        _, _, hist = blob_run
        d = F.drift_summary(hist)
        assert d.gauss_drift < 1e-10
        assert d.f_drift < 1e-12
        assert d.G_lm_drift < 1e-10
        assert d.Q_drift < 1e-12

    def test_mismatched_f_gives_constant_offset(self, geo):
        state, ch = F.initial_state(geo, F.central_charge(geo), f_offset=0.05)
        _, _, hist = F.run(state, ch, "coulomb", 0.1, 20, record_every=5)
        G = np.asarray(hist.G_lm)
        np.testing.assert_allclose(G, -0.05, atol=1e-12)

    def test_lambda_rate_second_order(self, geo):
        src = F.oscillating_blob(geo, radius=3.0, amplitude=0.5, q0={(0, 0, 1): 1.0})
        errs = []
        for dt in (0.2, 0.1):
            state, ch = F.initial_state(geo, src)
            _, _, hist = F.run(state, ch, "coulomb", dt, int(round(2.0 / dt)), track_phi=True)
            errs.append(F.lambda_rate_error(hist, dt))
        assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)

    def test_lambda_rate_needs_phi(self, blob_run):
        with pytest.raises(ValueError):
            F.lambda_rate_error(blob_run[2], 0.1)


class TestMultipolesAndCharge:
    def test_centered_charge(self, geo):
        state, ch = F.initial_state(geo, F.central_charge(geo, 1.0))
        E = F.boundary_multipoles(state, "E")
        assert E[0] == pytest.approx(1 / SQRT4PI, abs=1e-2)
        assert np.abs(E[1:]).max() < 1e-2
        q = F.total_charge(state, ch)
        assert q.Q == 1.0
        assert q.from_f00 == pytest.approx(1.0, abs=1e-2)
        assert q.from_flux == pytest.approx(1.0, abs=1e-12)

    def test_zero_field(self, geo):
        state, _ = F.vacuum_state(geo)
        assert not F.boundary_multipoles(state, "E").any()
        assert not F.boundary_multipoles(state, "phi").any()

    def test_neutral_dipole(self, geo):
        state, ch = F.initial_state(geo, F.neutral_dipole(geo))
        q = F.total_charge(state, ch)
        assert q.Q == 0.0
        assert abs(q.from_f00) < 1e-2
        # the dipole shows up in the l = 1, m = 0 channel
        assert abs(ch.f[geo.lm_index(1, 0)]) > 10 * abs(ch.f[0])

    def test_unknown_multipole_kind(self, geo):
        with pytest.raises(ValueError):
            F.boundary_multipoles(F.vacuum_state(geo)[0], "B")


def test_energy_error_is_second_order(geo):
    state0, ch0 = F.vacuum_state(geo)
    state0 = F.add_transverse_field(state0, seed=4, amplitude=0.3)
    errs = []
    for dt in (0.2, 0.1):
        _, _, hist = F.run(state0, ch0, "temporal", dt, int(round(4.0 / dt)))
        e = np.asarray(hist.energy)
        errs.append(np.abs(e - e[0]).max())
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.3)


def test_history_columns(blob_run):
    _, _, hist = blob_run
    names, data = hist.columns()
    assert names[:4] == ["t", "gauss_max", "Q", "energy"]
    assert data.shape == (len(hist.t), len(names))
    assert "lam_0_0" in names and "G_lm_2_-2" in names


class TestChargeOperator:
    @pytest.mark.parametrize("k", [1, 2, -3])
    def test_plane_wave_eigenvalue(self, k):
        assert Qm.eigenvalue_residual(Qm.LambdaGrid(256, 2 * np.pi * 8), k) < 1e-10

    def test_constant_state(self):
        grid = Qm.LambdaGrid(64, 10.0)
        psi = Qm.BoundaryWaveFunction(grid, np.ones(64)).normalized()
        assert np.abs(Qm.apply_charge_operator(psi).psi).max() < 1e-12

    def test_requires_unit_norm(self):
        grid = Qm.LambdaGrid(64, 10.0)
        with pytest.raises(ValueError):
            Qm.apply_charge_operator(Qm.BoundaryWaveFunction(grid, np.ones(64)))

    def test_internal_factor(self):
        grid = Qm.LambdaGrid(128, 2 * np.pi * 4)
        pw = Qm.plane_wave(grid, 1.0).psi
        psi = Qm.BoundaryWaveFunction(grid, np.outer(pw, [1.0, 1j]) / np.sqrt(2))
        out = Qm.apply_charge_operator(psi).psi
        np.testing.assert_allclose(out, SQRT4PI * psi.psi, atol=1e-10)

    def test_matrix_matches_spectral_operator(self):
        grid = Qm.LambdaGrid(16, 16.0)
        psi = Qm.random_localized(grid, seed=1, band=2, width=2.0)
        dense = Qm.charge_matrix(16, 16.0) @ psi.psi
        np.testing.assert_allclose(dense, Qm.apply_charge_operator(psi).psi, atol=1e-12)


@given(seed=st.integers(0, 2**31 - 1))
def test_canonical_commutator(seed):
    grid = Qm.LambdaGrid(256, 2 * np.pi * 8)
    assert Qm.commutator_residual(Qm.random_localized(grid, seed=seed)) < 1e-8


@pytest.fixture(scope="module")
def report():
    return Qm.center_demo(4, 2)


class TestCenterDemo:
    def test_restricted_sectors(self, report):
        assert report.restricted.count == 4
        assert report.restricted.multiplicities == [2, 2, 2, 2]

    def test_unrestricted_single_sector(self, report):
        assert report.unrestricted.count == 1
        assert report.unrestricted_center_dim == 1

    def test_charge_is_central(self, report):
        assert report.charge_center_residual < 1e-9

    def test_matches_brute_force(self):
        from sslab.studies import brute_force_dims
        Q = Qm.charge_matrix(3, 3.0)
        gens = [Q, Qm.shift_matrix(3)]
        assert vnalg.center(gens).dim == brute_force_dims(gens)["center"] == 3

    def test_dimension_cap(self):
        with pytest.raises(vnalg.DimensionError):
            Qm.center_demo(16, 8)
