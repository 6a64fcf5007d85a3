"""Mutual completion of multiple incomplete kernel matrices.

Given K symmetric positive definite kernel matrices with rows/columns hidden
per view, a shared model matrix (full, PPCA-restricted, or factor-analysis
restricted) is fitted by block coordinate descent under the LogDet divergence,
and the hidden blocks are imputed from it.
"""

from .engines import (
    CompletionConfig,
    CompletionResult,
    FaModel,
    FullModel,
    PcaModel,
    average_kernel,
    degrees_of_freedom,
    fa_estep,
    fa_model_update,
    fc_model_update,
    impute_view,
    objective,
    pca_model_update,
    regularize,
    run_completion,
    select_rank,
)
from .errors import (
    DimensionError,
    FormatError,
    MkmcError,
    NotPositiveDefiniteError,
    NumericalError,
)
from .linalg import (
    EigenDecomposition,
    eigh_sorted,
    is_positive_definite,
    logdet,
    logdet_divergence,
    symmetrize,
)
from .recovery import (
    RecoveryReport,
    SyntheticSpec,
    compare_methods,
    generate_synthetic,
    hidden_block_error,
)
from .views import (
    Fill,
    PartitionedView,
    VisibilityPattern,
    apply_mask,
    partition,
    random_mask,
    unpartition,
)

__version__ = "0.1.0"
