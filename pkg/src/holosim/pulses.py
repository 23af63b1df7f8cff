"""Bright/dark bases and drive schedules for a three-level Lambda system.

A gate is a rotation by ``gamma`` about the Bloch axis
``n = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))``.  Both
schedule families realize it as a single cyclic loop of the bright state
against the auxiliary level:

* ``tounhqc`` -- time-optimal loop: constant drive amplitude with a linearly
  swept common drive phase, duration ``2 sqrt(pi^2 - (pi - gamma)^2) / omega0``.
* ``nhqc`` -- conventional loop: two pi-area segments of duration
  ``pi / omega0`` each, with a phase jump of ``gamma - pi`` at the midpoint,
  total duration ``2 pi / omega0``.

Drive-phase convention (fixed once, package-wide): the |1>-|e> drive carries
the common swept phase ``phi1(t)``; the |0>-|e> drive carries
``phi1(t) + phi + pi``.  The constant offset keeps the dark state decoupled
at all times, and the extra ``pi`` together with the slope sign
``2 (gamma - pi) / tau`` makes the realized qubit block equal the ideal
rotation matrix (see :func:`holosim.gates.ideal_single_qubit`) up to a
global phase, for both schedule families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi
DEGENERATE_GAMMA_TOL = 1e-9

SCHEMES = ("tounhqc", "nhqc")


@dataclass(frozen=True)
class GateSpec:
    """Target rotation: angle ``gamma`` about the axis set by (theta, phi)."""

    theta: float
    phi: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi}")
        if not 0.0 < self.gamma < TWO_PI:
            raise ValueError(
                f"gamma must lie in (0, 2 pi), got {self.gamma}; "
                "the identity gate has no loop"
            )


@dataclass(frozen=True)
class Segment:
    """One piecewise-defined stretch of a schedule.

    ``phi1(t) = phi1_offset + phi1_slope * (t - t_start)`` is the common
    drive phase; ``phi0_offset`` is the constant extra phase on the
    |0>-|e> drive.
    """

    t_start: float
    t_end: float
    omega: float
    phi1_offset: float
    phi1_slope: float
    theta_mix: float
    phi0_offset: float

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ValueError("segment must have positive duration")
        if self.omega < 0.0:
            raise ValueError("drive amplitude must be non-negative")

    def phi1(self, t: float) -> float:
        return self.phi1_offset + self.phi1_slope * (t - self.t_start)


@dataclass(frozen=True)
class PulseSchedule:
    """Contiguous segments covering [0, duration], plus optional edge ramps.

    ``omega0`` is the nominal peak amplitude; error injection uses it to
    normalize relative detunings.  ``edge_ramp`` > 0 replaces the hard
    rise/fall at the schedule boundaries by sin^2 ramps of that length.
    """

    duration: float
    segments: tuple[Segment, ...]
    omega0: float
    edge_ramp: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("schedule duration must be positive")
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        if abs(self.segments[0].t_start) > 1e-15 * self.duration:
            raise ValueError("first segment must start at t = 0")
        for a, b in zip(self.segments, self.segments[1:]):
            if not math.isclose(a.t_end, b.t_start, rel_tol=0.0, abs_tol=1e-12 * self.duration):
                raise ValueError("segments must be contiguous")
        last = self.segments[-1]
        if not math.isclose(last.t_end, self.duration, rel_tol=0.0, abs_tol=1e-12 * self.duration):
            raise ValueError("segments must cover the full duration")
        if self.edge_ramp < 0.0 or 2.0 * self.edge_ramp > self.duration:
            raise ValueError("edge ramp must satisfy 0 <= 2*ramp <= duration")

    def segment_at(self, t: float) -> Segment:
        """Segment containing ``t``; boundaries belong to the later segment."""
        if t < 0.0 or t > self.duration * (1.0 + 1e-12):
            raise ValueError(f"time {t} outside [0, {self.duration}]")
        for seg in self.segments[:-1]:
            if t < seg.t_end:
                return seg
        return self.segments[-1]

    def envelope_factor(self, t: float) -> float:
        """Edge-ramp multiplier in [0, 1]; identically 1 when edge_ramp is 0."""
        r = self.edge_ramp
        if r <= 0.0:
            return 1.0
        if t < r:
            return math.sin(0.5 * math.pi * t / r) ** 2
        if t > self.duration - r:
            return math.sin(0.5 * math.pi * (self.duration - t) / r) ** 2
        return 1.0

    def drive_values(self, t: float) -> tuple[float, float, float, float]:
        """Instantaneous (omega_0e, omega_1e, phi_0, phi_1) at time ``t``."""
        om0e, om1e, phi0, phi1 = drive_arrays(self, np.array([t]))
        return (float(om0e[0]), float(om1e[0]), float(phi0[0]), float(phi1[0]))


@dataclass(frozen=True)
class LoopParams:
    """Loop angles (chi, alpha(t), eta(t)) of the auxiliary-state trajectory.

    ``alpha`` and ``eta`` are linear in time: value = offset + slope * t.
    The closure conditions are eta(0) = 0 and eta(duration) = pi.
    """

    chi: float
    alpha_offset: float
    alpha_slope: float
    eta_offset: float
    eta_slope: float
    duration: float

    def alpha(self, t):
        return self.alpha_offset + self.alpha_slope * np.asarray(t, dtype=float)

    def eta(self, t):
        return self.eta_offset + self.eta_slope * np.asarray(t, dtype=float)


class ScheduleSamples(NamedTuple):
    times: np.ndarray
    omega_0e: np.ndarray
    omega_1e: np.ndarray
    phi_0: np.ndarray
    phi_1: np.ndarray


def bright_dark_basis(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Bright/dark superpositions of |0>, |1> embedded in the qutrit.

    bright = sin(theta/2) e^{i phi} |0> + cos(theta/2) |1>
    dark   = cos(theta/2) e^{i phi} |0> - sin(theta/2) |1>
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    s, c = math.sin(0.5 * theta), math.cos(0.5 * theta)
    ph = np.exp(1j * phi)
    bright = np.array([s * ph, c, 0.0], dtype=complex)
    dark = np.array([c * ph, -s, 0.0], dtype=complex)
    return bright, dark


def tounhqc_duration(gamma: float, omega0: float) -> float:
    """Time-optimal loop duration 2 sqrt(pi^2 - (pi - gamma)^2) / omega0."""
    return 2.0 * math.sqrt(math.pi**2 - (math.pi - gamma) ** 2) / omega0


def nhqc_duration(omega0: float) -> float:
    """Conventional two-segment loop duration 2 pi / omega0."""
    return TWO_PI / omega0


def _check_synthesis_args(spec: GateSpec, omega0: float) -> None:
    if omega0 <= 0.0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    if spec.gamma < DEGENERATE_GAMMA_TOL or TWO_PI - spec.gamma < DEGENERATE_GAMMA_TOL:
        raise ValueError(
            f"gamma = {spec.gamma} is degenerate: the loop closes with zero phase"
        )


def synthesize_tounhqc(
    spec: GateSpec, omega0: float, edge_ramp: float = 0.0
) -> PulseSchedule:
    """Time-optimal schedule: one segment, constant amplitude, linear phase.

    The common phase sweeps as ``2 (gamma - pi) t / tau`` (slope magnitude
    ``2 |pi - gamma| / tau``; the sign realizes the ideal gate matrix under
    the package drive convention, and flips automatically for gamma > pi).
    """
    _check_synthesis_args(spec, omega0)
    tau = tounhqc_duration(spec.gamma, omega0)
    segment = Segment(
        t_start=0.0,
        t_end=tau,
        omega=omega0,
        phi1_offset=0.0,
        phi1_slope=2.0 * (spec.gamma - math.pi) / tau,
        theta_mix=spec.theta,
        phi0_offset=spec.phi + math.pi,
    )
    return PulseSchedule(
        duration=tau,
        segments=(segment,),
        omega0=omega0,
        edge_ramp=edge_ramp,
        label="tounhqc",
    )


def synthesize_nhqc(
    spec: GateSpec, omega0: float, edge_ramp: float = 0.0
) -> PulseSchedule:
    """Conventional schedule: two pi-area segments with a midpoint phase jump.

    Each segment holds the common phase constant; the jump of ``gamma - pi``
    at ``tau / 2`` sets the loop phase.  Total duration is ``2 pi / omega0``
    independent of gamma.
    """
    _check_synthesis_args(spec, omega0)
    tau = nhqc_duration(omega0)
    half = 0.5 * tau
    common = dict(
        omega=omega0,
        phi1_slope=0.0,
        theta_mix=spec.theta,
        phi0_offset=spec.phi + math.pi,
    )
    segments = (
        Segment(t_start=0.0, t_end=half, phi1_offset=0.0, **common),
        Segment(t_start=half, t_end=tau, phi1_offset=spec.gamma - math.pi, **common),
    )
    return PulseSchedule(
        duration=tau,
        segments=segments,
        omega0=omega0,
        edge_ramp=edge_ramp,
        label="nhqc",
    )


def synthesize(
    spec: GateSpec, omega0: float, scheme: str, edge_ramp: float = 0.0
) -> PulseSchedule:
    """Dispatch to one of the schedule families by name."""
    if scheme == "tounhqc":
        return synthesize_tounhqc(spec, omega0, edge_ramp)
    if scheme == "nhqc":
        return synthesize_nhqc(spec, omega0, edge_ramp)
    raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")


def loop_params(spec: GateSpec, omega0: float) -> LoopParams:
    """Loop angles of the time-optimal schedule.

    chi = arccos(-(pi - gamma)/pi), eta(t) = pi t / tau,
    alpha(t) = 2 (pi - gamma) t / tau.  These satisfy the coupled loop
    equations omega = -d(alpha)/dt * tan(chi) and
    d(alpha)/dt = -2 d(eta)/dt * cos(chi) identically.
    """
    _check_synthesis_args(spec, omega0)
    tau = tounhqc_duration(spec.gamma, omega0)
    chi = math.acos(-(math.pi - spec.gamma) / math.pi)
    return LoopParams(
        chi=chi,
        alpha_offset=0.0,
        alpha_slope=2.0 * (math.pi - spec.gamma) / tau,
        eta_offset=0.0,
        eta_slope=math.pi / tau,
        duration=tau,
    )


def loop_residuals(loop: LoopParams, omega0: float, n_points: int = 1000) -> tuple[float, float]:
    """Max absolute residuals of the two coupled loop equations on a grid.

    Returns (max |omega + d(alpha)/dt tan(chi)|, scaled by omega0, and
    max |d(alpha)/dt + 2 d(eta)/dt cos(chi)| scaled by the slope magnitude).
    """
    t = np.linspace(0.0, loop.duration, n_points)
    alpha_dot = np.full_like(t, loop.alpha_slope)
    eta_dot = np.full_like(t, loop.eta_slope)
    r1 = np.max(np.abs(omega0 + alpha_dot * math.tan(loop.chi))) / omega0
    scale = max(abs(loop.alpha_slope), abs(eta_dot).max())
    r2 = np.max(np.abs(alpha_dot + 2.0 * eta_dot * math.cos(loop.chi)))
    return float(r1), float(r2 / scale if scale > 0 else r2)


def geometric_phase(loop: LoopParams, n_points: int = 10001) -> float:
    """Loop integral of sin^2(eta) sin^2(chi) d(alpha) by Simpson quadrature."""
    if n_points < 3:
        raise ValueError("need at least 3 quadrature points")
    if n_points % 2 == 0:
        n_points += 1
    t = np.linspace(0.0, loop.duration, n_points)
    integrand = np.sin(loop.eta(t)) ** 2 * math.sin(loop.chi) ** 2 * loop.alpha_slope
    h = t[1] - t[0]
    weights = np.ones(n_points)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(weights, integrand))


def drive_arrays(
    schedule: PulseSchedule, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (omega_0e, omega_1e, phi_0, phi_1) over an array of times.

    Exact segment boundaries take the later segment's values.
    """
    t = np.asarray(times, dtype=float)
    if t.size and (t.min() < -1e-15 or t.max() > schedule.duration * (1.0 + 1e-12)):
        raise ValueError("sample times outside the schedule window")
    ends = np.array([seg.t_end for seg in schedule.segments])
    idx = np.minimum(np.searchsorted(ends, t, side="right"), len(ends) - 1)

    starts = np.array([seg.t_start for seg in schedule.segments])[idx]
    omegas = np.array([seg.omega for seg in schedule.segments])[idx]
    offsets = np.array([seg.phi1_offset for seg in schedule.segments])[idx]
    slopes = np.array([seg.phi1_slope for seg in schedule.segments])[idx]
    thetas = np.array([seg.theta_mix for seg in schedule.segments])[idx]
    phi0s = np.array([seg.phi0_offset for seg in schedule.segments])[idx]

    env = np.ones_like(t)
    r = schedule.edge_ramp
    if r > 0.0:
        rising = t < r
        falling = t > schedule.duration - r
        env[rising] = np.sin(0.5 * math.pi * t[rising] / r) ** 2
        env[falling] = np.sin(0.5 * math.pi * (schedule.duration - t[falling]) / r) ** 2

    omega = omegas * env
    phi1 = offsets + slopes * (t - starts)
    return (
        omega * np.sin(0.5 * thetas),
        omega * np.cos(0.5 * thetas),
        phi1 + phi0s,
        phi1,
    )


def sample_schedule(schedule: PulseSchedule, dt: float) -> ScheduleSamples:
    """Sample drive values on a uniform grid including both endpoints.

    The grid spacing is at most ``dt``.  At a segment boundary the sample
    takes the later segment's values, so phase jumps appear exactly at the
    boundary node.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > schedule.duration:
        raise ValueError(f"dt = {dt} exceeds schedule duration {schedule.duration}")
    n = max(1, math.ceil(schedule.duration / dt - 1e-12))
    times = np.linspace(0.0, schedule.duration, n + 1)
    om0e, om1e, phi0, phi1 = drive_arrays(schedule, times)
    return ScheduleSamples(times, om0e, om1e, phi0, phi1)


class SteppingGrid(NamedTuple):
    """Midpoint/node grid for piecewise-constant propagation.

    Nodes are aligned to segment boundaries so phase jumps are never
    smeared across a step.  ``nodes`` has one more entry than ``mids``.
    """

    nodes: np.ndarray
    mids: np.ndarray
    dts: np.ndarray


def stepping_grid(schedule: PulseSchedule, dt: float) -> SteppingGrid:
    """Integration grid with a node at every segment boundary."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    nodes = [0.0]
    for seg in schedule.segments:
        length = seg.t_end - seg.t_start
        steps = max(1, math.ceil(length / dt - 1e-12))
        inner = np.linspace(seg.t_start, seg.t_end, steps + 1)[1:]
        nodes.extend(inner.tolist())
    nodes = np.asarray(nodes)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    return SteppingGrid(nodes=nodes, mids=mids, dts=np.diff(nodes))
