import math

import numpy as np
import pytest

from holosim import twoqubit as tq
from holosim.evolve import ErrorInjection, IntegratorConfig
from holosim.gates import ideal_control_rk
from holosim.quantum import average_gate_fidelity, basis_state

PI = math.pi
G_EFF = 2 * PI * 5e6


@pytest.fixture
def model():
    return tq.CompositeModel(g_eff=G_EFF)


class TestScheduleDurations:
    def test_time_optimal_quarter_pi(self):
        sched = tq.build_cphase_schedule(PI / 4, G_EFF, "tounhqc")
        assert sched.duration == pytest.approx(math.sqrt(7) * PI / (2 * G_EFF), rel=1e-12)

    def test_conventional_duration(self):
        sched = tq.build_cphase_schedule(PI / 4, G_EFF, "nhqc")
        assert sched.duration == pytest.approx(2 * PI / G_EFF, rel=1e-12)

    def test_time_optimal_half_pi(self):
        sched = tq.build_cphase_schedule(PI / 2, G_EFF, "tounhqc")
        assert sched.duration == pytest.approx(math.sqrt(3) * PI / G_EFF, rel=1e-12)


class TestCphasePropagator:
    @pytest.mark.parametrize("scheme", ["tounhqc", "nhqc"])
    def test_control_t(self, model, scheme):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, scheme)
        u4, leakage = tq.cphase_propagator(model, sched)
        assert 1 - average_gate_fidelity(ideal_control_rk(3), u4) < 1e-6
        assert leakage < 1e-6

    def test_conditioned_z(self, model):
        sched = tq.build_cphase_schedule(PI, model.g_eff, "tounhqc")
        u4, _ = tq.cphase_propagator(model, sched)
        assert 1 - average_gate_fidelity(np.diag([1, -1, 1, 1]), u4) < 1e-6

    def test_spectators_exact(self, model):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, "tounhqc")
        err = ErrorInjection(amp_fraction=0.07, detuning_fraction=-0.04)
        u4, _ = tq.cphase_propagator(model, sched, err=err)
        for k in (0, 2, 3):
            assert u4[k, k] == 1.0  # untouched rows stay literally identity
            assert np.sum(np.abs(u4[:, k])) == 1.0

    def test_leakage_small_across_gammas(self, model):
        for scheme in ("tounhqc", "nhqc"):
            for gamma in np.arange(PI / 8, PI + 1e-9, PI / 8):
                sched = tq.build_cphase_schedule(gamma, model.g_eff, scheme)
                _, leakage = tq.cphase_propagator(model, sched)
                assert leakage < 1e-6

    def test_noise_rejected(self, model):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, "tounhqc")
        with pytest.raises(ValueError, match="unitary-only"):
            tq.cphase_propagator(model, sched, noise=tq.ancilla_decay(10e-6))


class TestRamsey:
    def test_gate_off_reference_phase(self, model):
        thetas = np.linspace(0, 2 * PI, 24, endpoint=False)
        fringe = tq.ramsey_protocol(model, False, PI / 4, thetas)
        assert abs(tq.fringe_phase(*zip(*fringe))) < 1e-9

    @pytest.mark.parametrize("gamma", [PI / 4, PI / 2])
    def test_extracted_shift_matches_loop_phase(self, model, gamma):
        thetas = np.linspace(0, 2 * PI, 24, endpoint=False)
        on = tq.ramsey_protocol(model, True, gamma, thetas)
        off = tq.ramsey_protocol(model, False, gamma, thetas)
        assert tq.ramsey_phase_shift(on, off) == pytest.approx(gamma, abs=1e-3)

    def test_shift_equals_propagator_phase(self, model, rng):
        # ties the fringe readout to arg(U4[1,1] / U4[0,0]) for random gammas
        thetas = np.linspace(0, 2 * PI, 16, endpoint=False)
        for _ in range(20):
            gamma = rng.uniform(0.1, 2 * PI - 0.1)
            sched = tq.build_cphase_schedule(gamma, model.g_eff, "tounhqc")
            u4, _ = tq.cphase_propagator(model, sched)
            expected = np.angle(u4[1, 1] / u4[0, 0])
            on = tq.ramsey_protocol(model, True, gamma, thetas)
            off = tq.ramsey_protocol(model, False, gamma, thetas)
            shift = tq.ramsey_phase_shift(on, off)
            diff = (shift - expected + PI) % (2 * PI) - PI
            assert abs(diff) < 1e-6

    def test_empty_grid_rejected(self, model):
        with pytest.raises(ValueError, match="theta_grid"):
            tq.ramsey_protocol(model, True, PI / 4, [])

    def test_noisy_fringe_amplitude_shrinks(self, model):
        thetas = np.linspace(0, 2 * PI, 12, endpoint=False)
        clean = tq.ramsey_protocol(model, True, PI / 4, thetas)
        noisy = tq.ramsey_protocol(
            model, True, PI / 4, thetas, noise=tq.ancilla_decay(2e-6)
        )
        amp = lambda fr: 0.5 * (max(p for _, p in fr) - min(p for _, p in fr))
        assert amp(noisy) < amp(clean)


class TestPopulationTrace:
    def test_spectator_input_is_flat(self, model):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, "tounhqc")
        traj = tq.population_trace(model, sched, basis_state(5, 0))
        assert np.allclose(traj.states[:, 0], 1.0, atol=1e-12)

    @pytest.mark.parametrize("scheme", ["tounhqc", "nhqc"])
    def test_bright_state_excursion_and_return(self, model, scheme):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, scheme)
        traj = tq.population_trace(model, sched, basis_state(5, 1))
        # the ancilla level is visited mid-loop and empty again at the end
        assert traj.states[:, 4].max() > 0.1
        assert traj.states[-1, 1] == pytest.approx(1.0, abs=1e-4)
        assert traj.states[-1, 4] < 1e-4
        assert np.max(np.abs(traj.states.sum(axis=1) - 1.0)) < 1e-8

    def test_diagonal_gate_keeps_computational_weights(self, model):
        psi0 = (basis_state(5, 0) + basis_state(5, 1)) / math.sqrt(2)
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, "tounhqc")
        traj = tq.population_trace(model, sched, psi0)
        assert np.allclose(traj.states[:, 0], 0.5, atol=1e-12)
        assert traj.states[-1, 1] == pytest.approx(0.5, abs=1e-4)

    def test_noisy_trace_preserves_total_population(self, model):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, "tounhqc")
        traj = tq.population_trace(
            model, sched, basis_state(5, 1), noise=tq.ancilla_decay(5e-6)
        )
        assert np.max(np.abs(traj.states.sum(axis=1) - 1.0)) < 1e-8

    def test_dimension_check(self, model):
        sched = tq.build_cphase_schedule(PI / 4, model.g_eff, "tounhqc")
        with pytest.raises(ValueError, match="dimension"):
            tq.population_trace(model, sched, basis_state(3, 0))
