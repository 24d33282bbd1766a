"""
varest's public API.
"""

from varest.constants import (
    Config,
    DegenerateRegression,
    DegenerateVariate,
    DomainError,
    EstimatorKind,
    ExpansionValidityWarning,
    InputError,
    NegativeEstimateWarning,
    NumericError,
    OutputFormat,
    Source,
    ThetaMode,
    VarestError,
    ZeroDenominator,
)
from varest.estimators import (
    BatchEstimates,
    Estimate,
    EstimatorConfig,
    GeneralizedParams,
    KhoshParams,
    SahaiParams,
    est_generalized,
    est_khosh,
    est_product,
    est_ratio,
    est_regression,
    est_sahai_ray,
    est_unbiased,
    estimate,
    estimate_batch,
    regression_slope,
)
from varest.loaders import (
    SummaryParams,
    load_population_csv,
    load_summary_params,
    parse_summary_params,
    read_summary_params,
)
from varest.moments import (
    Population,
    PopulationMoments,
    SampleBatch,
    SampleStats,
    central_moment_ratio,
    population_moments,
    sample_stats,
    sample_stats_batch,
)
from varest.montecarlo import (
    EmpiricalReport,
    ExactReport,
    SimulationPlan,
    enumerate_exact,
    simulate,
    srswor_sample,
)
from varest.presets import (
    configs_for,
    default_table_configs,
    preset_config,
    resolve_presets,
)
from varest.report import render, reports_to_frame
from varest.theory import (
    GeneralizedDerived,
    TheoryReport,
    generalized_derived,
    khosh_gamma,
    optimal_params,
    pre,
    theoretical_bias,
    theoretical_mse,
    theory_reports,
    theory_table,
    with_optimal,
)

__all__ = [
    "Config",
    "EstimatorKind",
    "OutputFormat",
    "Source",
    "ThetaMode",
    "VarestError",
    "InputError",
    "NumericError",
    "DegenerateRegression",
    "DegenerateVariate",
    "DomainError",
    "ZeroDenominator",
    "NegativeEstimateWarning",
    "ExpansionValidityWarning",
    "Population",
    "PopulationMoments",
    "SampleStats",
    "SampleBatch",
    "central_moment_ratio",
    "population_moments",
    "sample_stats",
    "sample_stats_batch",
    "EstimatorConfig",
    "Estimate",
    "BatchEstimates",
    "GeneralizedParams",
    "KhoshParams",
    "SahaiParams",
    "est_unbiased",
    "est_ratio",
    "est_product",
    "est_regression",
    "est_khosh",
    "est_sahai_ray",
    "est_generalized",
    "estimate",
    "estimate_batch",
    "regression_slope",
    "GeneralizedDerived",
    "TheoryReport",
    "khosh_gamma",
    "generalized_derived",
    "theoretical_bias",
    "theoretical_mse",
    "optimal_params",
    "with_optimal",
    "pre",
    "theory_reports",
    "theory_table",
    "preset_config",
    "resolve_presets",
    "configs_for",
    "default_table_configs",
    "SimulationPlan",
    "EmpiricalReport",
    "ExactReport",
    "srswor_sample",
    "simulate",
    "enumerate_exact",
    "reports_to_frame",
    "render",
    "SummaryParams",
    "load_population_csv",
    "parse_summary_params",
    "read_summary_params",
    "load_summary_params",
]
