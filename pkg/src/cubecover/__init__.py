"""Exact verification, construction, decomposition and refutation of
hyperplane covers of the binary cube {0,1}^n."""

from .core import (
    CapExceededError,
    CoveringSystem,
    Params,
    DEFAULT_PARAMS,
    RowScaling,
    Scalar,
    SystemFormatError,
    UnitRow,
    Vertex,
    apply_rescaling,
    format_rational,
    parse_rational,
    parse_system,
    row_squared_norms,
    unit_row,
)
from .cube import CoverageReport, enumerate_uncovered, evaluate_row, sample_uncovered
from .essential import (
    EssentialReport,
    check_cover,
    check_minimality,
    check_support_bound,
    check_variable_usage,
    verify_essential,
)
from .construct import lr_cover
from .anticonc import (
    ScalePartition,
    ScalePartitionError,
    atom_probability,
    check_anticoncentration,
    concentration_window_prob,
    littlewood_offord_bound,
    many_scales_bound,
    max_atom_probability,
    scale_partition,
    subset_sum_counts,
    validate_scales,
)
from .plank import (
    PlankPreconditionError,
    SampleCapError,
    SignVector,
    SmallNormCheck,
    bang_signs,
    check_small_norm_precondition,
    find_uncovered_small_norm,
    hoeffding_bound,
)
from .decompose import (
    Decomposition1,
    Decomposition2,
    GreedySplit,
    check_decomposition1,
    check_decomposition2,
    first_decomposition,
    greedy_support_split,
    second_decomposition,
)
from .refute import (
    RefutationOutcome,
    StageFailure,
    attempt_refutation,
    choose_n3_assignment,
    k4_row_excluded,
    sample_n2_assignment,
)

__version__ = "0.1.0"
