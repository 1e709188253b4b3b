"""Cubic spline regression with min/max K-partition knot selection."""

from .basis import DesignMatrix, Knot, KnotSet, build_design_matrix, evaluate_spline, truncated_cubic
from .data import (
    ColumnMap,
    CrimeSeries,
    LoadReport,
    Observation,
    ScaleTransform,
    compute_rate,
    load_series,
    make_scale,
    write_series,
)
from .document import ModelDocument
from .exceptions import (
    ContractError,
    DataFormatError,
    DomainError,
    EmptySeriesError,
    InsufficientDataError,
    KpartError,
    NoFeasibleModelError,
    SingularDesignError,
)
from .knots import Partition, partition_indices, partition_mean, select_knots
from .ols import FitResult, bic, fit_ols
from .search import ModelSelectionResult, SubsetScore, best_subsets, fit_kpart, select_winner

__version__ = "0.1.0"
