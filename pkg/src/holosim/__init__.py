"""Pulse-level simulator for time-optimal holonomic gates on Lambda systems."""

from . import protocols, twoqubit
from .backend import backend_name
from .evolve import (
    DEFAULT_CONFIG,
    NO_ERROR,
    NO_NOISE,
    ErrorInjection,
    IntegratorConfig,
    NoiseModel,
    Trajectory,
    assemble_hamiltonian,
    dt_halving_delta,
    evolve_density,
    evolve_pure,
    gate_channel,
    propagator,
)
from .gates import (
    AxisAngle,
    axis_angle_decompose,
    clifford_group,
    compile_clifford,
    gate_spec_from_unitary,
    ideal_control_rk,
    ideal_single_qubit,
)
from .pulses import (
    GateSpec,
    LoopParams,
    PulseSchedule,
    Segment,
    bright_dark_basis,
    geometric_phase,
    loop_params,
    nhqc_duration,
    sample_schedule,
    synthesize,
    synthesize_nhqc,
    synthesize_tounhqc,
    tounhqc_duration,
)
from .quantum import (
    average_gate_fidelity,
    basis_state,
    bloch_coordinates,
    density,
    hermitian_propagator,
    partial_trace,
    tensor_product,
    unattenuated_fidelity,
)

__version__ = "0.1.0"
