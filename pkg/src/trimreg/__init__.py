"""trimreg: least trimmed squares regression.

Estimation by multi-start concentration with an exact enumeration oracle,
the piecewise-quadratic geometry of the trimmed objective, asymptotic
constants and the influence function of the estimator, Monte Carlo study
harnesses, and two confidence-region constructions (asymptotic normal
ball, bootstrap + depth trimming).
"""

from .errors import (
    AllStartsDegenerate,
    DimensionMismatch,
    DomainError,
    NonNumericCell,
    OnPieceBoundary,
    ParseError,
    QuadratureFailure,
    ResampleExhausted,
    SingularMatrix,
    TooFewRows,
    TooManySubsets,
    TrimregError,
)
from .inference import (
    DepthRegion,
    NormalBallRegion,
    bootstrap_fits,
    ci_depth_region,
    ci_normal_ball,
    depth,
)
from .model import (
    Dataset,
    HSubset,
    LocalQuadratic,
    TrimSpec,
    h_subset,
    local_quadratic,
    objective,
    piece_check,
    residuals,
)
from .numerics import (
    Matrix,
    RandomStream,
    chi2_quantile,
    make_stream,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    spd_solve,
)
from .population import (
    AsymptoticConstants,
    InfluencePoint,
    PopulationModel,
    empirical_design_moment,
    fisher_check,
    influence_function,
    trim_constants,
)
from .simulate import (
    Contamination,
    GenSpec,
    StudyResult,
    generate,
    run_consistency_study,
    run_normality_study,
)
from .solver import (
    LtsFit,
    SolverConfig,
    c_step,
    check_stationarity,
    exact_enumerate,
    fit,
    ls_fit_subset,
)

__version__ = "0.1.0"

__all__ = [
    "AllStartsDegenerate",
    "AsymptoticConstants",
    "Contamination",
    "Dataset",
    "DepthRegion",
    "DimensionMismatch",
    "DomainError",
    "GenSpec",
    "HSubset",
    "InfluencePoint",
    "LocalQuadratic",
    "LtsFit",
    "Matrix",
    "NonNumericCell",
    "NormalBallRegion",
    "OnPieceBoundary",
    "ParseError",
    "PopulationModel",
    "QuadratureFailure",
    "RandomStream",
    "ResampleExhausted",
    "SingularMatrix",
    "SolverConfig",
    "StudyResult",
    "TooFewRows",
    "TooManySubsets",
    "TrimSpec",
    "TrimregError",
    "bootstrap_fits",
    "c_step",
    "chi2_quantile",
    "check_stationarity",
    "ci_depth_region",
    "ci_normal_ball",
    "depth",
    "empirical_design_moment",
    "exact_enumerate",
    "fisher_check",
    "fit",
    "generate",
    "h_subset",
    "influence_function",
    "local_quadratic",
    "ls_fit_subset",
    "make_stream",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "objective",
    "piece_check",
    "residuals",
    "run_consistency_study",
    "run_normality_study",
    "spd_solve",
    "trim_constants",
]
