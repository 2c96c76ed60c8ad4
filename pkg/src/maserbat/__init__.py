"""Micromaser quantum battery: collision simulator, metrics, and optimizer."""

from .dynamics import (
    Coupling,
    CollisionUnitary,
    QubitParams,
    apply_collision,
    build_qubit_state,
    chamber_boundaries,
    collision_coefficients,
    collision_unitary,
    coupling_value,
    top_level_population,
)
from .errors import (
    MaserbatError,
    OptimizationError,
    TruncationOverflowError,
    ValidationError,
)
from .fock import (
    hermitian_eigendecomposition,
    number_state,
    partial_trace_qubit,
    purity,
    tensor_with_qubit,
    vacuum_state,
    validate_density_matrix,
)
from .loss import (
    LossConfig,
    LossObjective,
    ParamVector,
    composite_term,
    evaluate_loss,
    mean_params,
    penalty_window,
    stability_penalty,
)
from .metrics import (
    WignerGrid,
    cotangent_populations,
    energy,
    ergotropy,
    passive_energy,
    populations,
    wigner,
)
from .optimize import (
    OptOptions,
    OptResult,
    minimize,
    multi_restart,
    numerical_gradient,
)
from .presets import PRESETS, get_preset
from .protocol import (
    BatchSpec,
    ProtocolSpec,
    Trajectory,
    extend_protocol,
    load_state_json,
    run_protocol,
    trajectory_from_state,
    write_populations_csv,
    write_state_json,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BatchSpec",
    "CollisionUnitary",
    "Coupling",
    "LossConfig",
    "LossObjective",
    "MaserbatError",
    "OptOptions",
    "OptResult",
    "OptimizationError",
    "ParamVector",
    "PRESETS",
    "ProtocolSpec",
    "QubitParams",
    "Trajectory",
    "TruncationOverflowError",
    "ValidationError",
    "WignerGrid",
    "apply_collision",
    "build_qubit_state",
    "chamber_boundaries",
    "collision_coefficients",
    "collision_unitary",
    "composite_term",
    "cotangent_populations",
    "coupling_value",
    "energy",
    "ergotropy",
    "evaluate_loss",
    "extend_protocol",
    "get_preset",
    "hermitian_eigendecomposition",
    "load_state_json",
    "mean_params",
    "minimize",
    "multi_restart",
    "number_state",
    "numerical_gradient",
    "partial_trace_qubit",
    "passive_energy",
    "penalty_window",
    "populations",
    "purity",
    "run_protocol",
    "stability_penalty",
    "tensor_with_qubit",
    "top_level_population",
    "trajectory_from_state",
    "vacuum_state",
    "validate_density_matrix",
    "wigner",
    "write_populations_csv",
    "write_state_json",
    "write_trajectory_csv",
]
