"""Multidimensional RAS balancing of nonnegative tensors, with IO-table analytics.

The balancing engine rescales a D-dimensional nonnegative tensor until
its sums over every dimension match prescribed (D-1)-dimensional margin
targets; classical 2-D RAS is the two-dimensional special case. On top of
it sit the accounting layer for square industry-by-industry tables
(technical coefficients, total requirements matrix, resource prediction)
and comparison metrics (Frobenius distances, relative-deviation reports).

The hot fiber-scaling kernel is a compiled extension with a pure-NumPy
fallback selected at import; ``multiras.kernel_backend`` names the one in
use.
"""

from ._backend import BACKEND as kernel_backend
from ._backend import available_kernels
from .balancing import (
    BalanceConfig,
    BalanceResult,
    MarginViolation,
    OrderPolicy,
    RatioFamily,
    RatioViolation,
    TerminationMode,
    TerminationReason,
    adjust_dimension,
    all_cross_ratio_families,
    balance,
    box_family,
    check_margin_compatibility,
    classical_ras,
    delta_metric,
    margin_residual,
    sample_ratio_families,
    structure_conservation_check,
)
from .errors import (
    DimensionError,
    DuplicateCellError,
    IdentityViolationError,
    IncompatibleMarginsError,
    MissingCellError,
    MultirasError,
    NegativeValueError,
    NonPositiveCellError,
    ParseError,
    ShapeMismatchError,
    SingularMatrixError,
    TensorFileError,
    ZeroDenominatorError,
    ZeroFiberPositiveMarginError,
)
from .ingest import (
    read_io_table,
    read_margins,
    read_tensor,
    read_tensor_wide,
    write_grid,
    write_margins,
    write_tensor,
)
from .io_analysis import (
    CoefficientMatrix,
    IOTable,
    SpectralConditionWarning,
    leontief_inverse,
    predict_resources,
    technical_coefficients,
)
from .metrics import (
    DeviationReport,
    DistanceMatrix,
    aggregate_slices,
    distance_matrix,
    frobenius_distance,
    relative_deviation,
)
from .tensor import MarginSet, Tensor

__version__ = "0.1.0"

__all__ = [
    "BalanceConfig",
    "BalanceResult",
    "CoefficientMatrix",
    "DeviationReport",
    "DimensionError",
    "DistanceMatrix",
    "DuplicateCellError",
    "IOTable",
    "IdentityViolationError",
    "IncompatibleMarginsError",
    "MarginSet",
    "MarginViolation",
    "MissingCellError",
    "MultirasError",
    "NegativeValueError",
    "NonPositiveCellError",
    "OrderPolicy",
    "ParseError",
    "RatioFamily",
    "RatioViolation",
    "ShapeMismatchError",
    "SingularMatrixError",
    "SpectralConditionWarning",
    "Tensor",
    "TensorFileError",
    "TerminationMode",
    "TerminationReason",
    "ZeroDenominatorError",
    "ZeroFiberPositiveMarginError",
    "adjust_dimension",
    "aggregate_slices",
    "all_cross_ratio_families",
    "available_kernels",
    "balance",
    "box_family",
    "check_margin_compatibility",
    "classical_ras",
    "delta_metric",
    "distance_matrix",
    "frobenius_distance",
    "kernel_backend",
    "leontief_inverse",
    "margin_residual",
    "predict_resources",
    "read_io_table",
    "read_margins",
    "read_tensor",
    "read_tensor_wide",
    "relative_deviation",
    "sample_ratio_families",
    "structure_conservation_check",
    "technical_coefficients",
    "write_grid",
    "write_margins",
    "write_tensor",
    "__version__",
]
