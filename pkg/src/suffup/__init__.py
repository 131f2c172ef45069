"""Testing for sufficient follow-up in right-censored survival data with a cure fraction."""

from .cure import (
    Clamp,
    CureRateEstimate,
    EpsilonBranch,
    EpsilonChoice,
    epsilon_star,
    estimate,
    gumbel_extrapolate,
    phat_gumbel,
    phat_naive,
    user_epsilon,
)
from .data import (
    EmptySample,
    MalformedRow,
    MissingEventTime,
    NonPositiveTime,
    Observation,
    SampleSummary,
    Status,
    SurvivalDataError,
    SurvivalSample,
    UnknownStatus,
    load_csv,
    summarize,
    to_csv,
)
from .followup import (
    AsymptoticDiagnostic,
    DegenerateDenominator,
    TestResult,
    asymptotic_coeffs,
    asymptotic_diagnostic,
    bootstrap_test,
    statistic,
)
from .km import RiskTable, StepFunction, censoring_km, km_fit, risk_table, variance_process

__version__ = "0.1.0"
