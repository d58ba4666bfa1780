"""imkit: measures, decompositions, and conversion tools for the imaginarity resource theory."""

__version__ = "0.1.0"

from .states import (
    BipartiteState,
    ConvergenceError,
    CovarianceError,
    DensityMatrix,
    DimensionMismatch,
    InvariantError,
    PureState,
    SolverError,
    Tolerances,
    DEFAULT_TOLS,
)
from .linalg import (
    TakagiFactorization,
    bures_angle,
    partial_trace,
    partial_transpose,
    psd_sqrt,
    root_fidelity,
    takagi,
    tensor,
    trace_norm,
)
from .measures import (
    geometric_imaginarity,
    geometric_imaginarity_pure,
    is_real_state,
    real_entanglement_infidelity,
    real_entanglement_monotone,
)
from .decompositions import (
    ConjugateOrthogonalEnsemble,
    Ensemble,
    EnsembleRotation,
    average_conjugate_product,
    conjugate_orthogonal_decomposition,
    equal_imaginarity_decomposition,
    rotate_ensemble,
)
from .transforms import (
    ApproxParams,
    ConversionResult,
    KrausSet,
    approx_fidelity,
    approx_prob,
    covariance_residual,
    is_covariant,
    max_ball_state_pure,
    max_geometric_in_ball_pure,
    merge_cp_maps,
    min_ball_state,
    min_geometric_in_ball,
    prob_exact,
    prob_upper_bound,
    real_frame,
    realify_covariant,
    rho_covariance_residual,
    symmetrize_rho_covariant,
)
from .sdp import (
    ChoiMatrix,
    FeasibilityReport,
    SdpSolution,
    SolverConfig,
    SolverStatus,
    apply_choi,
    choi_from_kraus,
    feasibility_alpha,
    optimal_fidelity_pure_target,
    real_embed,
)
from .fileio import ParseError

__all__ = [name for name in dir() if not name.startswith("_")]
