"""crowdwealth: a deterministic crowd wealth redistribution simulator.

A population of agents reacts to an external force and to the previous
aggregate move of the crowd; each agent's wealth is then scaled up or down
depending on whether its move agreed with the crowd's realized direction.
Trend-following closed forms, reference random-walk regimes, and a
distribution-analysis toolkit (histograms, tail fits, shape classification,
survey ingestion) round out the package. See the README for the CLI.
"""

__version__ = "0.1.0"

from .analysis import (
    Classification,
    ClassifyConfig,
    ConcentrationProfile,
    Histogram,
    RankCurve,
    TailFit,
    auto_width,
    ccdf,
    classify,
    classify_histogram,
    concentration_profile,
    convert_exponents,
    fit_loglog,
    gini,
    pdf_histogram,
    rank_curve,
    skewness,
    summarize,
    synthesize_samples,
)
from .closedform import (
    BProfile,
    generate_profile,
    linear_declining_wealth,
    trendy_wealth,
    trendy_wealth_ratio,
)
from .config import ScenarioConfig, config_from_dict, load_config
from .errors import (
    ConfigError,
    CrowdWealthError,
    InsufficientDataError,
    InvalidInputError,
    SurveyFormatError,
    UnboundedRunError,
)
from .ingest import BucketedSurvey, parse_survey, to_equal_buckets
from .model import (
    AgentParams,
    CrowdState,
    ForceSeries,
    aggregate_observation,
    decide,
    response_scale,
    sign0,
    system_response,
)
from .rewards import (
    RewardRegime,
    StepOutcome,
    apply_floor,
    step_additive_random,
    step_feedback_binary,
    step_feedback_continuous,
    step_multiplicative_random,
)
from .scenario import WealthSeries, run_scenario

__all__ = [
    "__version__",
    "AgentParams",
    "BProfile",
    "BucketedSurvey",
    "Classification",
    "ClassifyConfig",
    "ConcentrationProfile",
    "ConfigError",
    "CrowdState",
    "CrowdWealthError",
    "ForceSeries",
    "Histogram",
    "InsufficientDataError",
    "InvalidInputError",
    "RankCurve",
    "RewardRegime",
    "ScenarioConfig",
    "StepOutcome",
    "SurveyFormatError",
    "TailFit",
    "UnboundedRunError",
    "WealthSeries",
    "aggregate_observation",
    "apply_floor",
    "auto_width",
    "ccdf",
    "classify",
    "classify_histogram",
    "concentration_profile",
    "config_from_dict",
    "convert_exponents",
    "decide",
    "fit_loglog",
    "generate_profile",
    "gini",
    "linear_declining_wealth",
    "load_config",
    "parse_survey",
    "pdf_histogram",
    "rank_curve",
    "response_scale",
    "run_scenario",
    "sign0",
    "skewness",
    "step_additive_random",
    "step_feedback_binary",
    "step_feedback_continuous",
    "step_multiplicative_random",
    "summarize",
    "synthesize_samples",
    "system_response",
    "to_equal_buckets",
    "trendy_wealth",
    "trendy_wealth_ratio",
]
