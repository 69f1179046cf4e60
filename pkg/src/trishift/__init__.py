"""Finite-section laboratory for shifts on tridiagonal reproducing-kernel
spaces: coefficient families, explicit operator sections, a trailing-window
compact-plus-isometry criterion, polar splits, and kernel-side identities."""

from .analysis import (
    BoundUnavailableError,
    CriterionReport,
    DecompositionResult,
    EquivalenceDiagnostics,
    IndexData,
    NearSingularError,
    VERDICT_FAILS,
    VERDICT_HOLDS,
    VERDICT_INCONCLUSIVE,
    check_main_criterion,
    column_norm_profile,
    compact_isometry_split,
    equivalence_diagnostics,
    index_data,
    neumann_error_curve,
    polar_decompose,
)
from .expr import (
    EvalError,
    ExprSyntaxError,
    SequenceExpr,
    parse_sequence_expr,
)
from .kernels import (
    AdjointIdentityError,
    DefectMismatchError,
    KernelDivergenceError,
    KernelValue,
    PointSet,
    adjoint_eigen_check,
    adjoint_eigen_residual,
    adjoint_residual_grid,
    defect_apply,
    defect_matrix,
    eval_basis,
    eval_kernel,
    gram_matrix,
    kernel_coefficients,
)
from .operators import (
    BlockSet,
    TruncatedOperator,
    build_adjoint,
    build_blocks,
    build_left_inverse,
    build_shift,
    build_tail_blocks,
    dense_json,
    monomial_in_basis,
    neumann_partial_sum,
    sparse_triplets,
    write_triplets_csv,
)
from .sequences import (
    AssumptionReport,
    CoefficientSpec,
    HorizonError,
    SequencePair,
    SequenceSpecError,
    ZeroCoefficientError,
    c_coefficients,
    d_coefficients,
    load_spec_file,
    materialize,
    spec_from_document,
    validate_assumptions,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointIdentityError",
    "AssumptionReport",
    "BlockSet",
    "BoundUnavailableError",
    "CoefficientSpec",
    "CriterionReport",
    "DecompositionResult",
    "DefectMismatchError",
    "EquivalenceDiagnostics",
    "EvalError",
    "ExprSyntaxError",
    "HorizonError",
    "IndexData",
    "KernelDivergenceError",
    "KernelValue",
    "NearSingularError",
    "PointSet",
    "SequenceExpr",
    "SequencePair",
    "SequenceSpecError",
    "TruncatedOperator",
    "VERDICT_FAILS",
    "VERDICT_HOLDS",
    "VERDICT_INCONCLUSIVE",
    "ZeroCoefficientError",
    "adjoint_eigen_check",
    "adjoint_eigen_residual",
    "adjoint_residual_grid",
    "build_adjoint",
    "build_blocks",
    "build_left_inverse",
    "build_shift",
    "build_tail_blocks",
    "c_coefficients",
    "check_main_criterion",
    "column_norm_profile",
    "compact_isometry_split",
    "d_coefficients",
    "defect_apply",
    "defect_matrix",
    "dense_json",
    "equivalence_diagnostics",
    "eval_basis",
    "eval_kernel",
    "gram_matrix",
    "index_data",
    "kernel_coefficients",
    "load_spec_file",
    "materialize",
    "monomial_in_basis",
    "neumann_error_curve",
    "neumann_partial_sum",
    "parse_sequence_expr",
    "polar_decompose",
    "sparse_triplets",
    "spec_from_document",
    "validate_assumptions",
    "write_triplets_csv",
    "__version__",
]
