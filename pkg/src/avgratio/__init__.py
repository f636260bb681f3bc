"""Average-case approximation ratio of a truthful scheduling mechanism without payments."""

from .bounds import (
    central_binomial_bound,
    event_a_probability,
    lemma1_cap,
    lemma4_check,
    theorem1_bound,
)
from .distributions import (
    Convention,
    DistributionSpec,
    Family,
    THRESHOLD_QUANTILE,
    cdf,
    sample,
    solve_threshold,
)
from .errors import BudgetExceededError, InvalidInputError, NumericalError, UnsupportedSizeError
from .mechanism import (
    DeviationReport,
    MechanismOutcome,
    allocate,
    allocate_oracle,
    best_deviation,
    deviation_cost,
    social_cost,
)
from .simulation import (
    RatioEstimate,
    SimulationConfig,
    estimate_average_ratio,
    estimate_event_a,
    n_sweep,
    worst_case_sweep,
)

__version__ = "0.1.0"
