"""Second-order PageRank: exact, truncated and sparse power methods.

The stationary matrix ``X`` of a second-order Markov chain with teleportation
is computed either densely (:func:`power_method`) or as a sparse-plus-background
approximation ``S + e u^T`` (:func:`tpm_ding`, :func:`tpm_variant`,
:func:`tpm_partial`, :func:`spm`, :func:`spm_partial`). The multilinear
rank-one model is provided as a baseline (:func:`ml_fixed_point`).
"""

from .errors import (
    ConfigError,
    DimensionError,
    FormatError,
    HoprError,
    InvalidInputError,
    UnsupportedSizeError,
)
from .sparse_core import SliceSet, SparseColMatrix, column_l1_sums, dangling_deficit, spmv
from .thresholding import (
    ThresholdResult,
    objective,
    threshold,
    threshold_columns,
    threshold_matrix,
    threshold_oracle,
)
from .operators import (
    HoprProblem,
    IterationReport,
    apply_w,
    apply_w_column,
    model_residual,
    power_method,
    uniform_start,
)
from .truncated_pm import (
    ActiveSet,
    SparseUniformApprox,
    default_start,
    ding_approximation,
    pagerank_values,
    random_teleport_matrix,
    relative_error,
    shrink_active_set,
    split_pagerank_values,
    top_k,
    tpm_ding,
    tpm_partial,
    tpm_variant,
    variant_map,
)
from .sparse_pm import rho_experiment, spm, spm_partial, write_rho_table
from .multilinear import (
    FlattenedSliceSet,
    benchmark_flatten,
    ml_fixed_point,
    ml_matvec,
    permute_from_flattened,
    permute_to_flattened,
    rank_one,
)
from .data_io import (
    ResultRecord,
    build_slice_set,
    gen_synthetic,
    load_result,
    load_slice_set,
    load_triples,
    save_result,
    save_slice_set,
    save_triples,
)

__version__ = "0.1.0"
