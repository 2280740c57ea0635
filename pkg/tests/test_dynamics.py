import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcsim.dynamics import (
    CoverageWarning,
    FrequencyGrid,
    OneExcState,
    SolverOptions,
    TwoExcState,
    covering_grid,
    evolve,
    initial_states,
    make_grid,
    normalized_pulse,
    observables,
    rhs_one,
    rhs_two,
    waveguide_photon_number,
)
from jcsim.errors import ConfigError, IntegrationError
from jcsim.model import PulseSpec, SystemParams, pulse_time_profile, resonances


def _random_two(rng, n, symmetric=True):
    phi = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    if symmetric:
        phi = phi + phi.T
    vec = lambda: rng.normal(size=n) + 1j * rng.normal(size=n)  # noqa: E731
    return TwoExcState(phi, vec(), vec(), complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))


class TestGrid:
    def test_spacing_matches_paper_grid(self):
        g = make_grid(0.0, 25 * 0.2, 100)
        assert g.dw == pytest.approx(50 * 0.2 / 99)

    def test_two_points(self):
        np.testing.assert_array_equal(make_grid(0.0, 1.0, 2).points, [-1.0, 1.0])

    def test_coverage_warning(self):
        p, pu = SystemParams(10.0), PulseSpec(0.2)
        with pytest.warns(CoverageWarning):
            make_grid(0.0, 25 * 0.2, 100, p, pu)
        with warnings.catch_warnings():
            warnings.simplefilter("error", CoverageWarning)
            make_grid(0.0, 15.0, 100, p, pu)
            covering_grid(p, pu, 64)

    @pytest.mark.parametrize("args", [(0.0, 1.0, 1), (0.0, 0.0, 10), (0.0, -1.0, 10), (math.inf, 1.0, 4)])
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            FrequencyGrid(*args)

    def test_trapezoid_exact_for_linear(self):
        g = FrequencyGrid(1.0, 2.0, 7)
        assert g.integrate(3 * g.points + 1) == pytest.approx(3 * 4.0 + 4.0)


class TestInitialStates:
    def test_empty_system(self):
        pu = PulseSpec(0.2, 0.4)
        grid = FrequencyGrid(0.4, 5.0, 100)
        one, two = initial_states(pu, grid)
        assert one.a_g == one.a_e == two.z_g == two.z_e == 0
        assert not np.any(two.x_g) and not np.any(two.x_e)
        assert abs(one.norm(grid) - 1) < 1e-14
        assert abs(two.norm(grid) - 1) < 1e-14

    def test_peak_joint_spectrum(self):
        pu = PulseSpec(0.2)
        grid = FrequencyGrid(0.0, 25 * 0.2, 101)  # odd n puts omega0 on the grid
        _, two = initial_states(pu, grid)
        peak = np.abs(two.phi[50, 50]) ** 2
        expected = 4 / (math.pi * 0.2) ** 2
        assert abs(peak / expected - 1) < 0.02

    def test_renormalization_scales_drive(self):
        pu = PulseSpec(0.2)
        grid = FrequencyGrid(0.0, 1.0, 50)
        pn = normalized_pulse(pu, grid)
        assert pn.scale > 1
        assert pulse_time_profile(pn, 0.5) == pytest.approx(pn.scale * pulse_time_profile(pu, 0.5))


class TestRhs:
    def setup_method(self):
        self.grid = FrequencyGrid(0.0, 4.0, 9)
        self.rng = np.random.default_rng(7)

    def test_zero_before_arrival(self):
        p, pu = SystemParams(2.0), PulseSpec(0.5, t0=1.0)
        zero1 = OneExcState(0j, 0j, np.zeros(9, complex))
        d = rhs_one(p, pu, self.grid, 0.5, zero1)
        assert d.a_g == d.a_e == 0 and not np.any(d.b)
        zero2 = TwoExcState(np.zeros((9, 9), complex), np.zeros(9, complex), np.zeros(9, complex), 0j, 0j)
        one = OneExcState(0.3 + 0.1j, 0.2j, self.rng.normal(size=9) + 0j)
        d2 = rhs_two(p, pu, self.grid, 0.5, one, zero2)
        assert not np.any(d2.phi) and not np.any(d2.x_g) and d2.z_g == 0 and d2.z_e == 0

    def test_drive_only_at_arrival(self):
        p, pu = SystemParams(2.0), PulseSpec(0.5, t0=1.0)
        zero = OneExcState(0j, 0j, np.zeros(9, complex))
        d = rhs_one(p, pu, self.grid, 1.0, zero)
        assert d.a_g == pytest.approx(-1j * p.f * pulse_time_profile(pu, 1.0))
        assert d.a_e == 0 and not np.any(d.b)

    def test_decoupled_atom(self):
        p, pu = SystemParams(0.0, delta_a=0.8), PulseSpec(0.5)
        st_ = OneExcState(0.3 - 0.2j, 0.7 + 0.1j, self.rng.normal(size=9) + 0j)
        d = rhs_one(p, pu, self.grid, 0.3, st_)
        assert d.a_e == pytest.approx(-1j * 0.8 * st_.a_e, abs=1e-15)

    def test_symmetry(self):
        p, pu = SystemParams(1.3, delta_a=0.2), PulseSpec(0.5)
        one = OneExcState(0.3 + 0.1j, 0.2j, self.rng.normal(size=9) + 0j)
        two = _random_two(self.rng, 9)
        d = rhs_two(p, pu, self.grid, 0.7, one, two)
        assert np.max(np.abs(d.phi - d.phi.T)) == 0

    def test_decoupled_atom_two_excitation(self):
        p, pu = SystemParams(0.0), PulseSpec(0.5)
        one = OneExcState(0.3 + 0.1j, 0j, self.rng.normal(size=9) + 0j)
        two = _random_two(self.rng, 9)
        two = TwoExcState(two.phi, two.x_g, np.zeros(9, complex), two.z_g, 0j)
        d = rhs_two(p, pu, self.grid, 0.7, one, two)
        assert not np.any(d.x_e) and d.z_e == 0

    @given(st.floats(0, 5), st.floats(-2, 2), st.integers(0, 2**31 - 1))
    @settings(max_examples=50, deadline=None)
    def test_generator_conserves_continuum_bookkeeping(self, g, da, seed):
        # d/dt of the norm is the outflow through the open cavity channel,
        # which the b/phi equations pick up: with the drive off the pointwise
        # generator is anti-Hermitian apart from the -i kappa/2 cavity term.
        p, pu = SystemParams(g, delta_a=da), PulseSpec(0.5, t0=10.0)
        rng = np.random.default_rng(seed)
        st_ = OneExcState(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)), np.zeros(9, complex))
        d = rhs_one(p, pu, self.grid, 0.0, st_)
        dnorm = 2 * (np.conj(st_.a_g) * d.a_g + np.conj(st_.a_e) * d.a_e).real
        assert dnorm == pytest.approx(-p.kappa * abs(st_.a_g) ** 2, abs=1e-12)


class TestObservables:
    def test_initial(self):
        pu = PulseSpec(0.2)
        grid = FrequencyGrid(0.0, 5.0, 50)
        _, two = initial_states(pu, grid)
        obs = observables(two, grid)
        assert obs["N_c"] == obs["P_a"] == obs["p1"] == obs["p2"] == 0
        assert obs["norm"] == pytest.approx(1.0, abs=1e-14)

    def test_two_cavity_photons(self):
        n = 8
        grid = FrequencyGrid(0.0, 1.0, n)
        z = np.zeros(n, complex)
        obs = observables(TwoExcState(np.zeros((n, n), complex), z, z, 1 + 0j, 0j), grid)
        assert obs["N_c"] == 2 and obs["P_a"] == 0 and obs["p2"] == 1

    def test_excitation_number_identity(self):
        rng = np.random.default_rng(3)
        grid = FrequencyGrid(0.0, 2.0, 11)
        two = _random_two(rng, 11)
        obs = observables(two, grid)
        total = obs["N_c"] + obs["P_a"] + waveguide_photon_number(two, grid)
        assert total == pytest.approx(2 * obs["norm"], rel=1e-13)


class TestEvolve:
    def test_errors(self):
        p, pu = SystemParams(1.0), PulseSpec(0.5, t0=2.0)
        grid = FrequencyGrid(0.0, 3.0, 8)
        with pytest.raises(ConfigError):
            evolve(p, pu, grid, 1.0)
        with pytest.raises(ConfigError):
            evolve(p, pu, grid, 5.0, output_times=[1.0, 0.5])
        with pytest.raises(ConfigError):
            SolverOptions(rtol=0.0)

    def test_integration_error_carries_time(self, monkeypatch):
        import jcsim.dynamics as dyn

        real = dyn.pulse_time_profile

        def broken(pulse, t):
            return complex("nan") if t > 0.5 else real(pulse, t)

        monkeypatch.setattr(dyn, "pulse_time_profile", broken)
        p, pu = SystemParams(1.0), PulseSpec(0.5)
        with pytest.raises(IntegrationError) as info:
            evolve(p, pu, FrequencyGrid(0.0, 3.0, 8), 2.0)
        assert 0.4 < info.value.t <= 2.0

    def test_excitation_conservation_along_run(self):
        p = SystemParams(3.0)
        pu = PulseSpec(1.0, resonances(p).e1_plus.real)
        grid = covering_grid(p, pu, 40)
        traj = evolve(p, pu, grid, 6.0, output_times=np.linspace(0, 6, 13), keep_states=True)
        for two in traj.two:
            obs = observables(two, grid)
            assert obs["N_c"] + obs["P_a"] + waveguide_photon_number(two, grid) == pytest.approx(
                2 * obs["norm"], abs=1e-12)

    def test_norm_converges_under_refinement(self):
        # the discrete norm drift is quadrature error of pointwise-exact samples
        p = SystemParams(2.0)
        pu = PulseSpec(1.0, resonances(p).e1_plus.real)
        dev = []
        for n in (24, 48, 96):
            traj = evolve(p, pu, covering_grid(p, pu, n), 10.0, output_times=np.linspace(0, 10, 21))
            dev.append(np.max(np.abs(traj["norm"] - 1)))
        assert dev[2] < dev[1] < dev[0]

    def test_empty_cavity_example_t30(self):
        # stated example: g = 0, gamma0 = 0.2, t = 30 -> p1, p2 < 1e-3 and the
        # joint spectrum back to its initial shape within 1e-3 of peak
        p, pu = SystemParams(0.0), PulseSpec(0.2)
        grid = covering_grid(p, pu, 96)
        traj = evolve(p, pu, grid, 30.0, output_times=[0.0, 30.0], keep_states=True)
        jps0, jps1 = (np.abs(traj.two[i].phi) ** 2 for i in (0, 1))
        assert traj["p1"][-1] < 1e-3 and traj["p2"][-1] < 1e-3
        assert np.max(np.abs(jps1 - jps0)) / jps0.max() < 1e-3

    def test_blockade_example(self):
        peaks = {}
        for g in (0.0, 5.0):
            p = SystemParams(g)
            pu = PulseSpec(1.0, resonances(p).e1_plus.real)
            traj = evolve(p, pu, covering_grid(p, pu, 64), 10.0, output_times=np.linspace(0, 10, 101))
            peaks[g] = traj["p2"].max()
        assert peaks[5.0] < 0.5 * peaks[0.0]

    def test_snapshots_symmetric(self):
        p, pu = SystemParams(2.0), PulseSpec(0.5)
        grid = FrequencyGrid(0.0, 6.0, 20)
        traj = evolve(p, pu, grid, 3.0, output_times=[3.0], snapshot_times=[1.0, 2.5])
        assert sorted(traj.snapshots) == [1.0, 2.5]
        for phi in traj.snapshots.values():
            assert np.max(np.abs(phi - phi.T)) < 1e-12
