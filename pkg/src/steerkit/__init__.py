"""One-way EPR steering analysis for two-qubit states with loss."""
from .criteria import (
    NonsteerReport,
    OneWayVerdict,
    SteeringTest,
    Variant,
    ensemble_points,
    n_povm,
    n_restricted_pvm,
    one_way_verdict,
    povm_noise_construct,
)
from .errors import (
    ContractError,
    DomainError,
    InsufficientDataError,
    OutOfRegimeError,
    SolverError,
    SteerkitError,
    ValidationError,
)
from .expsim import CountTable, SourceConfig, heralding_efficiency, mix_sources, simulate_counts
from .qstate import (
    BlochForm,
    LossyState,
    Party,
    bloch_decompose,
    canonical_form,
    closest_werner,
    fidelity,
    lossy_embed,
    werner_state,
)
from .steering_game import (
    MeasurementSet,
    SteeringData,
    lhs_grid_check,
    platonic_settings,
    steering_bound,
    steering_parameter,
)
from .tomo import McSummary, mc_uncertainty, reconstruct

__version__ = "0.1.0"
