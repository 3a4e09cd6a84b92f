"""(1+1) evolutionary algorithms on linear functions with hidden support."""

from .constants import NumericError, ScheduleConstants, h, schedule_integral, solve_alpha
from .core import (
    AccumulatorOverflowError,
    LinearFunction,
    SearchPoint,
    bin_val,
    delta_evaluate,
    evaluate,
    one_max,
    parse_function_spec,
    random_linear,
)
from .engine import (
    EngineOptions,
    RunResult,
    default_max_evals,
    ea_step,
    init_search_point,
    run_ea,
    sample_flip_set,
)
from .adaptive import AdaptiveOptions, AdaptiveTrace, estimation_round, run_adaptive
from .isu import (
    PositionRates,
    SequenceSpec,
    iterated_log,
    lower_bound_diagnostic,
    make_rates,
    run_isu,
    sample_position_flips,
)
from .harness import (
    BenchReport,
    ConfigError,
    ExperimentConfig,
    compare_policies,
    run_grid,
    run_many,
    summarize,
)
from .policies import (
    RatePolicySpec,
    constant_policy,
    make_rate_stream,
    optimal_policy,
    optimal_schedule_rate,
    scaled_policy,
    scaled_schedule_rate,
    table_policy,
)
from .seeding import make_rng, split_seed

__version__ = "0.1.0"
