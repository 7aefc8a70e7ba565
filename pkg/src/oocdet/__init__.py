"""Out-of-core log-determinants under a memory budget, plus a scaling-law
extrapolator that predicts large-matrix log-determinants from principal
submatrix prefixes, kernel-matrix generators, and baseline estimators."""

from .baselines import SlqConfig, block_diagonal_logdet, slq_logdet
from .cost import CostBreakdown, predicted_cost
from .errors import (
    ConditioningError,
    CostDomainError,
    IndefiniteBlockError,
    NotSpdError,
    NumericalError,
    OocdetError,
    ScratchCapacityError,
    StorageError,
)
from .flodance import (
    FlodanceFit,
    build_design,
    extract_l,
    fit_design,
    fit_prefix,
    predict,
    predict_interval,
    scaling_ratio_trace,
    select_burn_in,
)
from .kernelgen import (
    LmcField,
    MaternParams,
    gen_gram,
    gp_conditional_error,
    lmc_block,
    matern_corr,
    matern_corr_r,
    random_lmc_field,
    spd_sqrt,
)
from .layout import BlockLayout
from .memdet import (
    Budget,
    GenericResult,
    RunInfo,
    ScheduleEntry,
    SpdResult,
    SymmetricResult,
    memdet_cholesky,
    memdet_ldl,
    memdet_lu,
    schedule,
    select_blocking,
)
from .prefixio import PrefixWriter, read_prefix
from .storage import BlockStore, CacheTable, IoCounters, MatrixFile, Scratchpad

__version__ = "0.1.0"

__all__ = [
    "BlockLayout", "BlockStore", "Budget", "CacheTable", "ConditioningError",
    "CostBreakdown", "CostDomainError", "FlodanceFit", "GenericResult",
    "IndefiniteBlockError", "IoCounters", "LmcField", "MaternParams",
    "MatrixFile", "NotSpdError", "NumericalError", "OocdetError",
    "PrefixWriter", "RunInfo", "ScheduleEntry", "Scratchpad",
    "ScratchCapacityError", "SlqConfig", "SpdResult", "StorageError",
    "SymmetricResult", "block_diagonal_logdet", "build_design", "extract_l",
    "fit_design", "fit_prefix", "gen_gram", "gp_conditional_error",
    "lmc_block", "matern_corr", "matern_corr_r", "memdet_cholesky",
    "memdet_ldl", "memdet_lu", "predict", "predict_interval",
    "predicted_cost", "random_lmc_field", "read_prefix",
    "scaling_ratio_trace", "schedule", "select_blocking", "select_burn_in",
    "slq_logdet", "spd_sqrt",
]
