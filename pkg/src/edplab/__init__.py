"""edplab: exact simulation and verification of two-party LOCC
entanglement-distillation protocols over adversarial and mixed error
models."""

from .errmodels import (
    DepolarizationModel,
    ErrorModel,
    ExtendedIndicatorVector,
    FidelityModel,
    IndicatorVector,
    MeasureRModel,
    depolarization_state,
    depolarize,
    enumerate_indicators,
    error_state,
    fidelity_witness,
)
from .locc import (
    Instrument,
    Protocol,
    Round,
    RunResult,
    conditional_fidelity,
    make_first_pair,
    make_random_pair,
    make_random_permutation,
    make_simple_random_hash,
    protocol_fidelity,
    run,
)
from .qcore import (
    ALICE,
    BOB,
    DensityMatrix,
    PureState,
    UnitaryOp,
    base_fidelity,
    bell_action,
    bell_identity_check,
    bell_state,
    epr_fidelity,
    epr_state,
    fidelity,
    partial_trace,
    pauli_deviation_sum,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "ALICE",
    "BOB",
    "DensityMatrix",
    "DepolarizationModel",
    "ErrorModel",
    "ExtendedIndicatorVector",
    "FidelityModel",
    "IndicatorVector",
    "Instrument",
    "MeasureRModel",
    "Protocol",
    "PureState",
    "Round",
    "RunResult",
    "UnitaryOp",
    "base_fidelity",
    "bell_action",
    "bell_identity_check",
    "bell_state",
    "conditional_fidelity",
    "depolarization_state",
    "depolarize",
    "enumerate_indicators",
    "epr_fidelity",
    "epr_state",
    "error_state",
    "fidelity",
    "fidelity_witness",
    "make_first_pair",
    "make_random_pair",
    "make_random_permutation",
    "make_simple_random_hash",
    "partial_trace",
    "pauli_deviation_sum",
    "protocol_fidelity",
    "run",
    "tensor",
]
