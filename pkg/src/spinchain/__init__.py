"""Pulse-level simulator for quantum-state transport on spin-qubit chains.

Gaussian exchange pulses realise SWAP and CNOT gates between neighbouring
sites; circuits shuttle an entangled pair down a chain or a two-row
ladder, under unitary dynamics or Markovian dephasing/amplitude damping.
"""

from .calibration import (
    CALIBRATION_STATES,
    CalibrationProblem,
    CalibrationResult,
    calibrate,
    calibrated_gate_params,
    nelder_mead,
    objective,
    slot_unitary,
)
from .circuits import (
    ChainTopology,
    FidelityMap,
    ParamState,
    TransportCircuit,
    build_transport_circuit,
    default_map_grid,
    fidelity_difference_map,
    fit_cos_two_phi,
    transport_fidelity,
    transport_input,
    zero_contour,
)
from .dynamics import (
    IntegratorConfig,
    NOISELESS,
    NoiseModel,
    TraceDriftError,
    evolve_lindblad,
    evolve_unitary,
    gate_fidelity,
)
from .hamiltonians import (
    DEFAULT_CNOT_COUPLING_PARAMS,
    DEFAULT_CNOT_LOCAL_PARAMS,
    DEFAULT_SWAP_PARAMS,
    GATE_KINDS,
    GateSpec,
    assemble_chain_hamiltonian,
    build_cnot_terms,
    build_rotated_cnot_terms,
    build_swap_terms,
    cnot_gate,
    ideal_gate_matrix,
    rotated_cnot_gate,
    swap_gate,
)
from .operators import (
    LocalOperator,
    apply_local_left,
    apply_local_right,
    apply_local_to_state,
    embed,
    fidelity,
    fidelity_to_pure,
    overlap_fidelity,
    partial_trace_keep_last_two,
    pauli,
)
from .pulses import (
    GaussianPulse,
    PulseSchedule,
    pulse_area,
    pulse_value,
    rescale,
    schedule_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "CALIBRATION_STATES",
    "CalibrationProblem",
    "CalibrationResult",
    "ChainTopology",
    "DEFAULT_CNOT_COUPLING_PARAMS",
    "DEFAULT_CNOT_LOCAL_PARAMS",
    "DEFAULT_SWAP_PARAMS",
    "FidelityMap",
    "GATE_KINDS",
    "GateSpec",
    "GaussianPulse",
    "IntegratorConfig",
    "LocalOperator",
    "NOISELESS",
    "NoiseModel",
    "ParamState",
    "PulseSchedule",
    "TraceDriftError",
    "TransportCircuit",
    "apply_local_left",
    "apply_local_right",
    "apply_local_to_state",
    "assemble_chain_hamiltonian",
    "build_cnot_terms",
    "build_rotated_cnot_terms",
    "build_swap_terms",
    "build_transport_circuit",
    "calibrate",
    "calibrated_gate_params",
    "cnot_gate",
    "default_map_grid",
    "embed",
    "evolve_lindblad",
    "evolve_unitary",
    "fidelity",
    "fidelity_difference_map",
    "fidelity_to_pure",
    "fit_cos_two_phi",
    "gate_fidelity",
    "ideal_gate_matrix",
    "nelder_mead",
    "objective",
    "overlap_fidelity",
    "partial_trace_keep_last_two",
    "pauli",
    "pulse_area",
    "pulse_value",
    "rescale",
    "rotated_cnot_gate",
    "schedule_sequence",
    "slot_unitary",
    "swap_gate",
    "transport_fidelity",
    "transport_input",
    "zero_contour",
]
