"""
spacetime-tt - Space-time spectral collocation in full-grid and tensor-train form

Chebyshev collocation of nonlinear convection-diffusion equations in time and
space at once, solved by Newton-GMRES on the full grid or by step-truncation
Newton on tensor trains with an adaptive truncation tolerance.
"""

from .chebyshev import ChebyshevGrid1D, build_grids, differentiation_matrix, gauss_lobatto_nodes
from .dense_core import KroneckerTerm, KrylovResult, kron_apply, krylov_solve, pointwise_scale
from .fullgrid_solver import (
    FullGridSystem,
    IndexSplit,
    ProblemSpec,
    jacobian_apply,
    newton_iterate,
    newton_solve,
    relative_error,
    residual,
    split_indices,
)
from .tt_core import (
    CrossResult,
    TTMatrix,
    TTTensor,
    cross_interpolate,
    maxvol,
    tt_cross,
    tt_from_dense,
    tt_kron,
    tt_matvec,
    tt_norm,
    tt_round,
    tt_to_dense,
)
from .tt_solver import (
    SpaceTimeTTSystem,
    TTJacobian,
    build_tt_operators,
    step_truncation_newton,
    tt_jacobian,
    tt_linear_solve,
    tt_newton_solve,
    tt_residual,
)
from .problems import burgers3d, experiment1_rootfind, get_problem, manufactured_ncd
from .report import IterationRecord, NewtonReport
from .config import ExperimentConfig, load_config
from .runner import ResultRow, compare_report, run_experiment
from .storage import ResultStorage, load_tt, save_tt
from .validation import validate_report
from .errors import (
    ConfigError,
    NonFiniteError,
    ProblemNotFound,
    ProblemSpecError,
    RankDeficiencyError,
    SchemaMismatchError,
    ShapeMismatchError,
    SizeCapExceeded,
    SpacetimeTTError,
    ValidationError,
)

__version__ = "0.1.0"
__all__ = [
    # Chebyshev discretization
    "ChebyshevGrid1D",
    "build_grids",
    "differentiation_matrix",
    "gauss_lobatto_nodes",

    # Dense Kronecker operators and Krylov
    "KroneckerTerm",
    "KrylovResult",
    "kron_apply",
    "krylov_solve",
    "pointwise_scale",

    # Full-grid solver
    "FullGridSystem",
    "IndexSplit",
    "ProblemSpec",
    "jacobian_apply",
    "newton_iterate",
    "newton_solve",
    "relative_error",
    "residual",
    "split_indices",

    # Tensor trains
    "CrossResult",
    "TTMatrix",
    "TTTensor",
    "cross_interpolate",
    "maxvol",
    "tt_cross",
    "tt_from_dense",
    "tt_kron",
    "tt_matvec",
    "tt_norm",
    "tt_round",
    "tt_to_dense",

    # TT solver
    "SpaceTimeTTSystem",
    "TTJacobian",
    "build_tt_operators",
    "step_truncation_newton",
    "tt_jacobian",
    "tt_linear_solve",
    "tt_newton_solve",
    "tt_residual",

    # Problems
    "burgers3d",
    "experiment1_rootfind",
    "get_problem",
    "manufactured_ncd",

    # Experiments and results
    "ExperimentConfig",
    "IterationRecord",
    "NewtonReport",
    "ResultRow",
    "ResultStorage",
    "compare_report",
    "load_config",
    "load_tt",
    "run_experiment",
    "save_tt",
    "validate_report",

    # Error handling
    "ConfigError",
    "NonFiniteError",
    "ProblemNotFound",
    "ProblemSpecError",
    "RankDeficiencyError",
    "SchemaMismatchError",
    "ShapeMismatchError",
    "SizeCapExceeded",
    "SpacetimeTTError",
    "ValidationError",
]
