import math

import numpy as np
import pytest

from holosim import pulses

from conftest import OMEGA0, random_gate_spec

PI = math.pi


class TestGateSpec:
    def test_rejects_zero_gamma(self):
        with pytest.raises(ValueError, match="gamma"):
            pulses.GateSpec(theta=0.0, phi=0.0, gamma=0.0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            pulses.GateSpec(theta=-0.1, phi=0.0, gamma=1.0)
        with pytest.raises(ValueError):
            pulses.GateSpec(theta=0.1, phi=7.0, gamma=1.0)
        with pytest.raises(ValueError):
            pulses.GateSpec(theta=0.1, phi=0.0, gamma=2.0 * PI)


class TestBrightDarkBasis:
    def test_degenerate_mixing_angle(self):
        bright, dark = pulses.bright_dark_basis(0.0, 0.0)
        assert np.allclose(bright, [0, 1, 0])
        assert np.allclose(dark, [1, 0, 0])

    def test_equal_mixing(self):
        bright, dark = pulses.bright_dark_basis(0.5 * PI, 0.0)
        assert np.allclose(bright, np.array([1, 1, 0]) / math.sqrt(2))
        assert np.allclose(dark, np.array([1, -1, 0]) / math.sqrt(2))

    def test_orthonormal_for_random_angles(self, rng):
        for _ in range(100):
            theta = rng.uniform(0, PI)
            phi = rng.uniform(0, 2 * PI)
            b, d = pulses.bright_dark_basis(theta, phi)
            assert abs(np.vdot(b, d)) < 1e-12
            assert np.linalg.norm(b) == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.norm(d) == pytest.approx(1.0, abs=1e-12)
            assert b[2] == 0.0 and d[2] == 0.0


class TestTimeOptimalSynthesis:
    def test_reference_drive_duration(self, sqrt_x_spec):
        # gamma = pi/2 at 8.660 MHz drive: 100 ns loop
        sched = pulses.synthesize_tounhqc(sqrt_x_spec, OMEGA0)
        assert sched.duration * 1e9 == pytest.approx(100.0, abs=0.05)

    def test_gamma_pi_matches_conventional_duration(self):
        spec = pulses.GateSpec(0.3, 0.0, PI)
        sched = pulses.synthesize_tounhqc(spec, OMEGA0)
        assert sched.duration == pytest.approx(2 * PI / OMEGA0, rel=1e-12)

    def test_gamma_quarter_pi_closed_form(self):
        spec = pulses.GateSpec(0.0, 0.0, PI / 4)
        sched = pulses.synthesize_tounhqc(spec, OMEGA0)
        assert sched.duration == pytest.approx(math.sqrt(7) * PI / (2 * OMEGA0), rel=1e-12)

    def test_single_constant_segment(self, sqrt_x_spec):
        sched = pulses.synthesize_tounhqc(sqrt_x_spec, OMEGA0)
        assert len(sched.segments) == 1
        seg = sched.segments[0]
        assert seg.omega == OMEGA0
        assert abs(seg.phi1_slope) == pytest.approx(
            2 * (PI - sqrt_x_spec.gamma) / sched.duration, rel=1e-12
        )

    def test_degenerate_gamma_rejected(self):
        spec = pulses.GateSpec(0.0, 0.0, 1e-12 + 1e-13)
        with pytest.raises(ValueError, match="degenerate"):
            pulses.synthesize_tounhqc(spec, OMEGA0)

    def test_requires_positive_omega(self, sqrt_x_spec):
        with pytest.raises(ValueError, match="omega0"):
            pulses.synthesize_tounhqc(sqrt_x_spec, 0.0)


class TestConventionalSynthesis:
    def test_reference_drive_duration(self, sqrt_x_spec):
        sched = pulses.synthesize_nhqc(sqrt_x_spec, OMEGA0)
        assert sched.duration * 1e9 == pytest.approx(115.47, abs=0.05)

    def test_two_pi_area_segments_with_jump(self):
        gamma = PI / 4
        spec = pulses.GateSpec(0.2, 0.1, gamma)
        sched = pulses.synthesize_nhqc(spec, OMEGA0)
        assert len(sched.segments) == 2
        first, second = sched.segments
        for seg in (first, second):
            assert seg.phi1_slope == 0.0
            # pulse area per segment is pi
            assert seg.omega * (seg.t_end - seg.t_start) == pytest.approx(PI, rel=1e-12)
        assert second.phi1_offset - first.phi1_offset == pytest.approx(gamma - PI, rel=1e-12)

    def test_duration_independent_of_gamma(self):
        for gamma in (0.3, 1.0, 2.5, 5.0):
            sched = pulses.synthesize_nhqc(pulses.GateSpec(0.0, 0.0, gamma), OMEGA0)
            assert sched.duration == pytest.approx(2 * PI / OMEGA0, rel=1e-12)


class TestDurationOrdering:
    def test_time_optimal_never_slower(self):
        gammas = np.linspace(0.01, PI, 100)
        tau_n = pulses.nhqc_duration(OMEGA0)
        for gamma in gammas:
            tau_t = pulses.tounhqc_duration(gamma, OMEGA0)
            assert tau_t <= tau_n * (1 + 1e-12)
            if gamma < PI - 1e-9:
                assert tau_t < tau_n

    def test_equality_only_at_pi(self):
        assert pulses.tounhqc_duration(PI, OMEGA0) == pytest.approx(
            pulses.nhqc_duration(OMEGA0), rel=1e-12
        )


class TestLoopParams:
    def test_gamma_pi_degenerates_to_equator(self):
        loop = pulses.loop_params(pulses.GateSpec(0.0, 0.0, PI), OMEGA0)
        assert loop.chi == pytest.approx(PI / 2, abs=1e-12)
        assert loop.alpha_slope == pytest.approx(0.0, abs=1e-9)

    def test_gamma_half_pi_chi(self):
        # cos(chi) = -(pi - gamma)/pi = -1/2
        loop = pulses.loop_params(pulses.GateSpec(0.0, 0.0, PI / 2), OMEGA0)
        assert loop.chi == pytest.approx(2 * PI / 3, abs=1e-12)

    def test_cyclic_condition(self, rng):
        for _ in range(20):
            spec = random_gate_spec(rng)
            loop = pulses.loop_params(spec, OMEGA0)
            assert loop.eta(0.0) == pytest.approx(0.0, abs=1e-12)
            assert float(loop.eta(loop.duration)) == pytest.approx(PI, abs=1e-12)

    def test_coupled_equation_residuals(self, rng):
        # both loop equations vanish (relative to the drive scale) on a grid
        for _ in range(50):
            spec = random_gate_spec(rng)
            loop = pulses.loop_params(spec, OMEGA0)
            r1, r2 = pulses.loop_residuals(loop, OMEGA0, n_points=1000)
            assert r1 < 1e-9
            assert r2 < 1e-9

    def test_amplitude_recovered_from_loop(self, rng):
        # omega = -d(alpha)/dt tan(chi) reproduces the drive amplitude
        for _ in range(20):
            spec = random_gate_spec(rng)
            loop = pulses.loop_params(spec, OMEGA0)
            recovered = -loop.alpha_slope * math.tan(loop.chi)
            assert recovered == pytest.approx(OMEGA0, rel=1e-9)


class TestGeometricPhase:
    def test_zero_when_alpha_frozen(self):
        loop = pulses.loop_params(pulses.GateSpec(0.0, 0.0, PI), OMEGA0)
        assert pulses.geometric_phase(loop) == pytest.approx(0.0, abs=1e-12)

    def test_closed_form_at_half_pi(self):
        # sin^2(chi) (pi - gamma) = (3/4)(pi/2) = 3 pi / 8
        loop = pulses.loop_params(pulses.GateSpec(0.0, 0.0, PI / 2), OMEGA0)
        assert pulses.geometric_phase(loop) == pytest.approx(3 * PI / 8, abs=1e-8)

    def test_closed_form_random(self, rng):
        for _ in range(10):
            spec = random_gate_spec(rng)
            loop = pulses.loop_params(spec, OMEGA0)
            expected = math.sin(loop.chi) ** 2 * (PI - spec.gamma)
            assert pulses.geometric_phase(loop) == pytest.approx(expected, abs=1e-8)

    def test_grid_convergence(self):
        loop = pulses.loop_params(pulses.GateSpec(0.0, 0.0, 1.1), OMEGA0)
        coarse = pulses.geometric_phase(loop, n_points=10_001)
        fine = pulses.geometric_phase(loop, n_points=20_001)
        assert abs(coarse - fine) < 1e-8


class TestSampling:
    def test_constant_segment_constant_samples(self, sqrt_x_spec):
        sched = pulses.synthesize_tounhqc(sqrt_x_spec, OMEGA0)
        samples = pulses.sample_schedule(sched, sched.duration / 50)
        assert np.ptp(samples.omega_0e) == pytest.approx(0.0, abs=1e-9)
        assert samples.times[0] == 0.0
        assert samples.times[-1] == pytest.approx(sched.duration, rel=1e-15)

    def test_sqrt_x_amplitudes_match_hardware_value(self, sqrt_x_spec):
        # theta = pi/2 splits 8.660 MHz into 6.124 MHz on both legs
        sched = pulses.synthesize_tounhqc(sqrt_x_spec, OMEGA0)
        samples = pulses.sample_schedule(sched, sched.duration / 10)
        mhz = samples.omega_0e / (2 * PI * 1e6)
        assert np.allclose(mhz, 6.124, atol=5e-4)
        assert np.allclose(samples.omega_0e, samples.omega_1e, atol=1e-6)

    def test_conventional_phase_jump_at_midpoint(self):
        gamma = PI / 4
        sched = pulses.synthesize_nhqc(pulses.GateSpec(0.0, 0.0, gamma), OMEGA0)
        samples = pulses.sample_schedule(sched, sched.duration / 10)
        mid = len(samples.times) // 2
        assert samples.phi_1[mid] - samples.phi_1[mid - 1] == pytest.approx(
            gamma - PI, rel=1e-12
        )
        assert samples.phi_1[mid] == samples.phi_1[-1]

    def test_dt_exceeding_duration(self, sqrt_x_spec):
        sched = pulses.synthesize_tounhqc(sqrt_x_spec, OMEGA0)
        with pytest.raises(ValueError, match="exceeds"):
            pulses.sample_schedule(sched, 2 * sched.duration)

    def test_amplitude_pythagoras_pointwise(self, rng):
        # omega_0e^2 + omega_1e^2 = omega^2 including ramped envelopes
        spec = random_gate_spec(rng)
        sched = pulses.synthesize_tounhqc(spec, OMEGA0, edge_ramp=5e-9)
        samples = pulses.sample_schedule(sched, sched.duration / 500)
        total = samples.omega_0e**2 + samples.omega_1e**2
        t = samples.times
        env = np.array([sched.envelope_factor(tk) for tk in t])
        assert np.allclose(total, (OMEGA0 * env) ** 2, rtol=1e-12, atol=1e-12)

    def test_phase_difference_fixed_between_legs(self, rng):
        # phi_0 - phi_1 is constant: the dark state stays decoupled
        spec = random_gate_spec(rng)
        sched = pulses.synthesize_tounhqc(spec, OMEGA0)
        samples = pulses.sample_schedule(sched, sched.duration / 200)
        diff = samples.phi_0 - samples.phi_1
        assert np.ptp(diff) < 1e-12


class TestSteppingGrid:
    def test_nodes_align_to_segment_boundary(self):
        sched = pulses.synthesize_nhqc(pulses.GateSpec(0.0, 0.0, 1.0), OMEGA0)
        grid = pulses.stepping_grid(sched, sched.duration / 1000)
        boundary = sched.segments[0].t_end
        assert np.min(np.abs(grid.nodes - boundary)) < 1e-20

    def test_step_sizes_cover_duration(self, sqrt_x_spec):
        sched = pulses.synthesize_tounhqc(sqrt_x_spec, OMEGA0)
        grid = pulses.stepping_grid(sched, sched.duration / 777)
        assert grid.dts.sum() == pytest.approx(sched.duration, rel=1e-12)
        assert np.all(grid.dts > 0)


class TestScheduleValidation:
    def test_gap_between_segments_rejected(self):
        seg1 = pulses.Segment(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0)
        seg2 = pulses.Segment(1.5, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError, match="contiguous"):
            pulses.PulseSchedule(duration=2.0, segments=(seg1, seg2), omega0=1.0)

    def test_coverage_enforced(self):
        seg = pulses.Segment(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0)
        with pytest.raises(ValueError, match="cover"):
            pulses.PulseSchedule(duration=2.0, segments=(seg,), omega0=1.0)

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            pulses.Segment(0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0)
