"""Exact density-matrix simulation of noisy Trotterized state transfer on qubit chains."""

from .analysis import (
    SweepResult,
    TransferRecord,
    delta_fidelity,
    delta_hitting,
    dynamics_error,
    hitting_time,
)
from .channels import (
    ChannelKind,
    ChannelSpec,
    crosstalk_zz,
    dephasing_t2,
    depolarizing_1q,
    lift_2q,
    pauli_1q,
    thermal_t1,
)
from .core import apply_kraus, apply_unitary, basis_state, embed, expectation
from .errors import (
    ComparisonError,
    ConfigError,
    ContractError,
    FitError,
    InputError,
    PSTError,
    UnmitigatableDepthError,
)
from .gates import AngleConvention, BasisChange, CircuitLayer, GateKind, GateOp, gate_matrix, xy_block
from .kernels import BACKEND
from .mitigation import (
    FitResult,
    estimate_alpha,
    fit_c1,
    fit_c2,
    mitigate,
    rescale,
    shift_time,
)
from .policy import NumericPolicy, get_policy, policy_override, set_policy
from .simulator import (
    ChainSpec,
    Crosstalk,
    CrosstalkMode,
    Decoherence,
    NoiseModel,
    StepProgram,
    TrotterCircuit,
    build_circuit,
    build_couplings,
    fidelity_series,
    initial_state,
    simulate,
    transfer_observable,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
