"""Fixed-point iteration schemes, convergence-rate analysis and a
Volterra-Fredholm integral-equation solver."""

from .analysis import (
    ComparisonReport,
    RateBound,
    Verdict,
    bound_new,
    bound_thakur,
    empirical_compare,
    theoretical_ratio,
)
from .integral import (
    IntegralProblem,
    NotAContractionError,
    SolveResult,
    apply_A,
    bound_56,
    certify_contraction,
    solve,
)
from .quadrature import QuadratureGrid, quadrature
from .schemes import (
    ParamSchedule,
    SchemeId,
    StopReason,
    Trajectory,
    run,
    step_classical,
    step_new,
    step_thakur,
)
from .space import (
    Box,
    DimensionError,
    DomainError,
    Lipschitz,
    MappingSpec,
    NormedSpace,
    ParameterError,
    Point,
    convex_combine,
    norm,
    spot_check_lipschitz,
)

__version__ = "0.1.0"
