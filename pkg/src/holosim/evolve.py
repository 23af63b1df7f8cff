"""Time-ordered propagation under a pulse schedule.

The unitary path multiplies exact step propagators built from a
fourth-order commutator-free exponential scheme (two exponentials per
step with the Hamiltonian sampled at the Gauss-Legendre nodes); for a
constant Hamiltonian this reduces exactly to exp(-i H dt).  The
open-system path integrates the Lindblad master equation with fixed-step
RK4 (default) or per-step exponentials of the Liouvillian at the same
order.  Integration grids always place a node at segment boundaries so
phase jumps are never smeared across a step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .backend import kernels
from .pulses import PulseSchedule, drive_arrays, stepping_grid

#: Qutrit basis ordering used throughout: (|0>, |1>, |e>).
QUTRIT_LEVELS = (0, 1, 2)
QUTRIT_DIM = 3

DEFAULT_STEPS = 2000
MIN_STEPS = 100
MAX_RATE_DT = 0.01


@dataclass(frozen=True)
class ErrorInjection:
    """Static control errors applied while assembling the Hamiltonian.

    ``amp_fraction`` scales both drive amplitudes by (1 + amp_fraction).
    ``detuning_fraction`` adds a diagonal term on the auxiliary level of
    size detuning_fraction * omega0 (relative mode); ``detuning_rad_s``
    adds an absolute diagonal detuning on top.
    """

    amp_fraction: float = 0.0
    detuning_fraction: float = 0.0
    detuning_rad_s: float = 0.0

    def detuning(self, omega0: float) -> float:
        return self.detuning_fraction * omega0 + self.detuning_rad_s


NO_ERROR = ErrorInjection()


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Collapse operators with rates for Lindblad evolution.

    An empty operator list means purely unitary evolution.  Rates are in
    1/s; each operator enters the dissipator as sqrt(rate) * op.
    """

    collapse_ops: tuple[tuple[np.ndarray, float], ...] = ()

    def __post_init__(self):
        for op, rate in self.collapse_ops:
            if rate < 0.0:
                raise ValueError(f"collapse rate must be non-negative, got {rate}")
            mat = np.asarray(op)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ValueError("collapse operators must be square matrices")

    @property
    def is_empty(self) -> bool:
        return not any(rate > 0.0 for _, rate in self.collapse_ops)

    @property
    def max_rate(self) -> float:
        return max((rate for _, rate in self.collapse_ops), default=0.0)

    def scaled_ops(self, dim: int) -> np.ndarray:
        """Stack of sqrt(rate)-scaled collapse operators, shape (K, dim, dim)."""
        ops = [
            math.sqrt(rate) * np.asarray(op, dtype=complex)
            for op, rate in self.collapse_ops
            if rate > 0.0
        ]
        for op in ops:
            if op.shape != (dim, dim):
                raise ValueError(
                    f"collapse operator shape {op.shape} does not match dim {dim}"
                )
        if not ops:
            return np.zeros((0, dim, dim), dtype=complex)
        return np.stack(ops)

    @classmethod
    def qutrit_relaxation(
        cls,
        t1_e_to_0: Optional[float] = None,
        t1_1_to_e: Optional[float] = None,
        tphi_e: Optional[float] = None,
        tphi_1: Optional[float] = None,
    ) -> "NoiseModel":
        """Transmon-ladder model on the (|0>, |1>, |e>) qutrit.

        Sequential decay |e> -> |0> and |1> -> |e> (the qubit level |1> sits
        above the auxiliary level), plus pure dephasing of |e> and |1>.
        Dephasing operators are sqrt(2/Tphi) |k><k|, so the coherence between
        |k> and a non-dephasing level decays at 1/Tphi.  ``None`` disables a
        channel.
        """
        ops = []
        if t1_e_to_0 is not None:
            lower = np.zeros((3, 3), dtype=complex)
            lower[0, 2] = 1.0
            ops.append((lower, 1.0 / t1_e_to_0))
        if t1_1_to_e is not None:
            lower = np.zeros((3, 3), dtype=complex)
            lower[2, 1] = 1.0
            ops.append((lower, 1.0 / t1_1_to_e))
        if tphi_e is not None:
            proj = np.zeros((3, 3), dtype=complex)
            proj[2, 2] = 1.0
            ops.append((proj, 2.0 / tphi_e))
        if tphi_1 is not None:
            proj = np.zeros((3, 3), dtype=complex)
            proj[1, 1] = 1.0
            ops.append((proj, 2.0 / tphi_1))
        return cls(collapse_ops=tuple(ops))


NO_NOISE = NoiseModel()


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``dt = None`` resolves to duration / 2000.  ``method`` selects the
    density-matrix integrator: "rk4" (fast path) or "expm" (per-step
    exponential of the Liouvillian, unconditionally trace preserving).
    """

    dt: Optional[float] = None
    method: str = "rk4"
    record_stride: int = 20

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.method not in ("rk4", "expm"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    def resolve_dt(self, duration: float) -> float:
        dt = self.dt if self.dt is not None else duration / DEFAULT_STEPS
        if dt > duration / MIN_STEPS:
            raise ValueError(
                f"step size {dt} too coarse: need dt <= duration/{MIN_STEPS}"
            )
        return dt


DEFAULT_CONFIG = IntegratorConfig()


class Trajectory(NamedTuple):
    times: np.ndarray
    states: np.ndarray


def hamiltonian_stack(
    schedule: PulseSchedule,
    times: np.ndarray,
    err: ErrorInjection = NO_ERROR,
    dim: int = QUTRIT_DIM,
    levels: tuple[Optional[int], int, int] = QUTRIT_LEVELS,
) -> np.ndarray:
    """Rotating-frame Hamiltonians at ``times``, shape (n, dim, dim).

    ``levels`` maps the Lambda-system roles (|0>, |1>, |e>) onto matrix
    indices; the |0> slot may be None when that leg of the drive is unused
    (then the schedule must have zero amplitude on it).
    """
    i0, i1, ie = levels
    om0e, om1e, phi0, phi1 = drive_arrays(schedule, times)
    scale = 0.5 * (1.0 + err.amp_fraction)
    h = np.zeros((len(times), dim, dim), dtype=complex)
    if i0 is None:
        if np.max(np.abs(om0e), initial=0.0) > 0.0:
            raise ValueError("schedule drives the |0> leg but no level is mapped to it")
    else:
        h[:, i0, ie] = scale * om0e * np.exp(1j * phi0)
        h[:, ie, i0] = np.conj(h[:, i0, ie])
    h[:, i1, ie] = scale * om1e * np.exp(1j * phi1)
    h[:, ie, i1] = np.conj(h[:, i1, ie])
    h[:, ie, ie] = err.detuning(schedule.omega0)
    return h


def assemble_hamiltonian(
    schedule: PulseSchedule, t: float, err: ErrorInjection = NO_ERROR
) -> np.ndarray:
    """Instantaneous 3x3 qutrit Hamiltonian at time ``t``.

    H = (omega_0e/2) e^{i phi_0} |0><e| + (omega_1e/2) e^{i phi_1} |1><e|
    + h.c. + delta |e><e|, with drive amplitudes scaled by the injected
    amplitude error.
    """
    if t < 0.0 or t > schedule.duration * (1.0 + 1e-12):
        raise ValueError(f"time {t} outside schedule window [0, {schedule.duration}]")
    return hamiltonian_stack(schedule, np.array([t]), err)[0]


def _recorded_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = [0]
    for k in range(n_steps):
        if (k + 1) % stride == 0 or k == n_steps - 1:
            idx.append(k + 1)
    return np.asarray(idx)


# Fourth-order commutator-free scheme: per step, the propagator is
# exp(-i dt G2) exp(-i dt G1) with generators G1 = a1 H(t1) + a2 H(t2),
# G2 = a2 H(t1) + a1 H(t2) sampled at the Gauss-Legendre nodes t1, t2.
_GL_C1 = 0.5 - math.sqrt(3.0) / 6.0
_GL_C2 = 0.5 + math.sqrt(3.0) / 6.0
_CF_A1 = 0.25 + math.sqrt(3.0) / 6.0
_CF_A2 = 0.25 - math.sqrt(3.0) / 6.0


def _cf4_generators(
    schedule: PulseSchedule,
    grid,
    err: ErrorInjection,
    dim: int,
    levels: tuple[Optional[int], int, int],
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step generator pairs and matching (duplicated) step sizes."""
    starts = grid.nodes[:-1]
    h1 = hamiltonian_stack(schedule, starts + _GL_C1 * grid.dts, err, dim, levels)
    h2 = hamiltonian_stack(schedule, starts + _GL_C2 * grid.dts, err, dim, levels)
    n = len(grid.dts)
    gens = np.empty((2 * n, dim, dim), dtype=complex)
    gens[0::2] = _CF_A1 * h1 + _CF_A2 * h2
    gens[1::2] = _CF_A2 * h1 + _CF_A1 * h2
    return gens, np.repeat(grid.dts, 2)


def propagator(
    schedule: PulseSchedule,
    err: ErrorInjection = NO_ERROR,
    config: IntegratorConfig = DEFAULT_CONFIG,
    dim: int = QUTRIT_DIM,
    levels: tuple[Optional[int], int, int] = QUTRIT_LEVELS,
) -> np.ndarray:
    """Full-schedule unitary as an ordered product of step propagators."""
    grid = stepping_grid(schedule, config.resolve_dt(schedule.duration))
    gens, dts = _cf4_generators(schedule, grid, err, dim, levels)
    return kernels.propagate_unitary(gens, dts)


def dt_halving_delta(
    schedule: PulseSchedule,
    err: ErrorInjection = NO_ERROR,
    config: IntegratorConfig = DEFAULT_CONFIG,
) -> float:
    """Max-norm change of the propagator when the step size is halved.

    Reported as a convergence diagnostic alongside simulation results.
    """
    dt = config.resolve_dt(schedule.duration)
    u_coarse = propagator(schedule, err, IntegratorConfig(dt=dt, record_stride=1))
    u_fine = propagator(schedule, err, IntegratorConfig(dt=dt / 2.0, record_stride=1))
    return float(np.max(np.abs(u_coarse - u_fine)))


def evolve_pure(
    psi0: np.ndarray,
    schedule: PulseSchedule,
    err: ErrorInjection = NO_ERROR,
    config: IntegratorConfig = DEFAULT_CONFIG,
    dim: int = QUTRIT_DIM,
    levels: tuple[Optional[int], int, int] = QUTRIT_LEVELS,
) -> Trajectory:
    """Propagate a pure state, recording every ``record_stride`` steps."""
    psi = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"initial state norm {norm!r} deviates from 1")
    grid = stepping_grid(schedule, config.resolve_dt(schedule.duration))
    gens, dts = _cf4_generators(schedule, grid, err, dim, levels)
    # two exponentials per physical step: double the recording stride so
    # states are only captured at step boundaries
    states = kernels.evolve_states(gens, dts, psi, 2 * config.record_stride)
    times = grid.nodes[_recorded_indices(len(grid.dts), config.record_stride)]
    return Trajectory(times=times, states=states)


def _interleaved_nodes(grid) -> np.ndarray:
    ts = np.empty(2 * len(grid.dts) + 1)
    ts[0::2] = grid.nodes
    ts[1::2] = grid.mids
    return ts


def _liouvillian(h: np.ndarray, c_ops: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    eye = np.eye(d)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in c_ops:
        cdc = c.conj().T @ c
        lv += np.kron(c, c.conj())
        lv -= 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return lv


def evolve_density(
    rho0: np.ndarray,
    schedule: PulseSchedule,
    noise: NoiseModel = NO_NOISE,
    err: ErrorInjection = NO_ERROR,
    config: IntegratorConfig = DEFAULT_CONFIG,
    dim: int = QUTRIT_DIM,
    levels: tuple[Optional[int], int, int] = QUTRIT_LEVELS,
) -> Trajectory:
    """Integrate the Lindblad master equation along the schedule.

    With an empty noise model this reproduces the pure-state evolution of
    the corresponding projector.  Raises on step-size violations
    (rate * dt must stay below 0.01).
    """
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match dim {dim}")
    dt = config.resolve_dt(schedule.duration)
    if noise.max_rate * dt >= MAX_RATE_DT:
        raise ValueError(
            f"step size violation: max rate * dt = {noise.max_rate * dt:.3g} "
            f"must stay below {MAX_RATE_DT}"
        )
    grid = stepping_grid(schedule, dt)
    c_ops = noise.scaled_ops(dim)
    rec = _recorded_indices(len(grid.dts), config.record_stride)
    times = grid.nodes[rec]

    if config.method == "rk4":
        h = hamiltonian_stack(schedule, _interleaved_nodes(grid), err, dim=dim, levels=levels)
        rhos = kernels.lindblad_rk4(h, grid.dts, rho, c_ops, config.record_stride)
        return Trajectory(times=times, states=rhos)

    # expm: two Liouvillian exponentials per step at the same fourth order;
    # the time-independent dissipator carries half weight in each factor
    from scipy.linalg import expm

    gens, _ = _cf4_generators(schedule, grid, err, dim, levels)
    half_ops = c_ops / math.sqrt(2.0)
    vec = rho.reshape(-1)
    out = [rho.copy()]
    n = len(grid.dts)
    for k in range(n):
        dt_k = grid.dts[k]
        vec = expm(_liouvillian(gens[2 * k], half_ops) * dt_k) @ vec
        vec = expm(_liouvillian(gens[2 * k + 1], half_ops) * dt_k) @ vec
        if (k + 1) % config.record_stride == 0 or k == n - 1:
            out.append(vec.reshape(dim, dim).copy())
    return Trajectory(times=times, states=np.array(out))


def gate_channel(
    schedule: PulseSchedule,
    noise: NoiseModel = NO_NOISE,
    err: ErrorInjection = NO_ERROR,
    config: IntegratorConfig = DEFAULT_CONFIG,
    dim: int = QUTRIT_DIM,
    levels: tuple[Optional[int], int, int] = QUTRIT_LEVELS,
) -> np.ndarray:
    """Superoperator of one full schedule, row-major vectorization.

    Satisfies vec(rho_out) = S vec(rho_in).  Without noise this is
    U (x) conj(U) for the schedule propagator U.
    """
    if noise.is_empty:
        u = propagator(schedule, err, config, dim=dim, levels=levels)
        return np.kron(u, u.conj())
    dt = config.resolve_dt(schedule.duration)
    if noise.max_rate * dt >= MAX_RATE_DT:
        raise ValueError("step size violation for the requested noise model")
    grid = stepping_grid(schedule, dt)
    c_ops = noise.scaled_ops(dim)
    h = hamiltonian_stack(schedule, _interleaved_nodes(grid), err, dim=dim, levels=levels)
    n = len(grid.dts)
    s = np.empty((dim * dim, dim * dim), dtype=complex)
    for j in range(dim * dim):
        unit = np.zeros((dim, dim), dtype=complex)
        unit[j // dim, j % dim] = 1.0
        final = kernels.lindblad_rk4(h, grid.dts, unit, c_ops, n)[-1]
        s[:, j] = final.reshape(-1)
    return s


def apply_superop(s: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a row-major-vectorized superoperator to a density matrix."""
    d = rho.shape[0]
    return (s @ rho.reshape(-1)).reshape(d, d)
