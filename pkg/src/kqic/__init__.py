"""Kernel quasi-independence testing for left-truncated, right-censored data.

The package tests whether a pair of ordered event times (entry, survival) is
coupled beyond the ordering itself, using a kernel statistic calibrated by a
wild bootstrap, with kernel-scale selection, five baseline tests, synthetic
generators and a benchmark harness.
"""

from .baselines import (
    BaselineOutcome,
    LogRankResult,
    StepSurvivalFunction,
    kaplan_meier,
    mb_test,
    minp_test,
    truncation_permutation,
    two_sample_logrank,
    weight_sc,
    wlr_statistic,
    wlr_test,
)
from .bootstrap import TestOutcome, bootstrap_distribution, rademacher_weights, run_test
from .data import (
    DatasetSummary,
    SurvivalSample,
    TruncatedDataset,
    load_csv,
    summarize,
    to_csv,
    validate,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateScaleError,
    FeasibilityError,
    KqicError,
    ParseError,
    SelectionError,
    ValidationError,
)
from .harness import (
    ExperimentConfig,
    RejectionReport,
    emit_report,
    run_benchmark,
    run_realdata,
)
from .kernels import KernelSpec, eval_kernel, gram_matrix, median_heuristic
from .selection import (
    SelectionConfig,
    SelectionResult,
    jn_matrix,
    select_bandwidths,
    variance_h1,
)
from .simgen import GeneratorModel, gaussian_copula_pair, gen_dataset, tune_censoring_rate
from .statistic import (
    BootstrapMatrix,
    StatisticMatrices,
    build_M,
    build_matrices,
    kendall_ka,
    kqic_statistic,
    kqic_statistic_oracle,
    pi_hat,
    unit_weight_contrast,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineOutcome",
    "BootstrapMatrix",
    "ConfigError",
    "DataError",
    "DatasetSummary",
    "DegenerateScaleError",
    "ExperimentConfig",
    "FeasibilityError",
    "GeneratorModel",
    "KernelSpec",
    "KqicError",
    "LogRankResult",
    "ParseError",
    "RejectionReport",
    "SelectionConfig",
    "SelectionError",
    "SelectionResult",
    "StatisticMatrices",
    "StepSurvivalFunction",
    "SurvivalSample",
    "TestOutcome",
    "TruncatedDataset",
    "ValidationError",
    "bootstrap_distribution",
    "build_M",
    "build_matrices",
    "emit_report",
    "eval_kernel",
    "gaussian_copula_pair",
    "gen_dataset",
    "gram_matrix",
    "jn_matrix",
    "kaplan_meier",
    "kendall_ka",
    "kqic_statistic",
    "kqic_statistic_oracle",
    "load_csv",
    "mb_test",
    "median_heuristic",
    "minp_test",
    "pi_hat",
    "rademacher_weights",
    "run_benchmark",
    "run_realdata",
    "run_test",
    "select_bandwidths",
    "summarize",
    "to_csv",
    "truncation_permutation",
    "tune_censoring_rate",
    "two_sample_logrank",
    "unit_weight_contrast",
    "validate",
    "variance_h1",
    "weight_sc",
    "wlr_statistic",
    "wlr_test",
]
