"""Distribution, simulation, and bound certificates for min/plus random trees."""

from .bounds import (
    CertificateReport,
    LowerStepModel,
    SandwichReport,
    UpperModel,
    a_sequence,
    b_sequence,
    certify_lower,
    certify_upper,
    f_eval,
    f_grad,
    lower_model_eval,
    lower_model_values,
    sandwich_check,
    upper_model_eval,
    upper_model_values,
)
from .distribution import (
    CRITICAL_C,
    MassFunction,
    Moments,
    SurvivalCurve,
    TruncationPolicy,
    default_growth_rule,
    evolve,
    evolve_record,
    moments,
    point_mass_initial,
    step_pmf,
    step_survival,
    write_distribution_csv,
    write_distribution_json,
)
from .regimes import (
    RegimeReport,
    classify,
    limit_survival,
    stationarity_residual,
    subcritical_fixed_point,
    supercritical_growth,
)
from .series import (
    LIMIT_MEAN,
    B,
    LimitDiagnostics,
    M,
    S_alpha,
    SeriesEval,
    diagnose,
    h,
    limit_cdf,
)
from .simulate import (
    ComparisonReport,
    EmpiricalSummary,
    SimConfig,
    compare_to_exact,
    run,
    sample_one,
)

__version__ = "0.1.0"

__all__ = [
    "CRITICAL_C",
    "LIMIT_MEAN",
    "B",
    "CertificateReport",
    "ComparisonReport",
    "EmpiricalSummary",
    "LimitDiagnostics",
    "LowerStepModel",
    "M",
    "MassFunction",
    "Moments",
    "RegimeReport",
    "S_alpha",
    "SandwichReport",
    "SeriesEval",
    "SimConfig",
    "SurvivalCurve",
    "TruncationPolicy",
    "UpperModel",
    "a_sequence",
    "b_sequence",
    "certify_lower",
    "certify_upper",
    "classify",
    "compare_to_exact",
    "default_growth_rule",
    "diagnose",
    "evolve",
    "evolve_record",
    "f_eval",
    "f_grad",
    "h",
    "limit_cdf",
    "limit_survival",
    "lower_model_eval",
    "lower_model_values",
    "moments",
    "point_mass_initial",
    "run",
    "sample_one",
    "sandwich_check",
    "stationarity_residual",
    "step_pmf",
    "step_survival",
    "subcritical_fixed_point",
    "supercritical_growth",
    "upper_model_eval",
    "upper_model_values",
    "write_distribution_csv",
    "write_distribution_json",
]
