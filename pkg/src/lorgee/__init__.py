"""Marginal regression (GEE) for correlated multinomial responses with
local-odds-ratios association structures."""

from .association import (
    AssociationStructure,
    LocalOddsRatios,
    PairTables,
    build_pair_tables,
    fit_structure,
    intrinsic_pars,
    local_or_of_table,
    matrix_lor,
    theta_from_scores,
)
from .data import (
    LongDataset,
    PairGrouping,
    SubjectBlock,
    load_dataset,
    pair_grouping,
    subject_blocks,
)
from .errors import (
    AssociationError,
    AssociationFitError,
    DataError,
    DegenerateProbabilityError,
    DuplicateObservationError,
    EmptyDataError,
    EstimationError,
    InvalidParameterError,
    InvalidResponseScaleError,
    IpfNonconvergenceError,
    LorgeeError,
    NonconvergenceError,
    NumericError,
    SingleOccasionError,
    SingularInformationError,
    SparseTableError,
    UsageError,
)
from .gee import (
    FitControl,
    GeeFit,
    assemble_weight,
    estimating_function,
    initial_beta,
    solve_gee,
)
from .inference import (
    FitReport,
    WaldResult,
    null_model_test,
    sandwich_cov,
    summarize,
    theta_block_matrix,
    wald_test,
)
from .ipf import IpfConfig, ipf_adjust, ipf_adjust_batch
from .links import (
    ADJACENT_LOGIT,
    ALL_LINKS,
    BASELINE_LOGIT,
    CUMULATIVE_CAUCHIT,
    CUMULATIVE_CLOGLOG,
    CUMULATIVE_LINKS,
    CUMULATIVE_LOGIT,
    CUMULATIVE_PROBIT,
    Coefficients,
    MarginalModelSpec,
    category_probs,
    jacobian_block,
    jacobian_stack,
    linear_predictor,
    probability_matrix,
)

__version__ = "0.1.0"
