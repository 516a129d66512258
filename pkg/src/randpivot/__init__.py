"""Randomized multinomial-weight pivots for the mean of short- and long-memory
linear processes."""

from .acvf import AcvfEstimates, bandwidth_q, estimate_acvf, sample_acvf, sample_acvfs, sample_mean
from .errors import (
    DegenerateWeights,
    NonpositiveStudentizer,
    NumericError,
    ParameterDomainError,
    ShapeError,
)
from .harness import (
    CoverageResult,
    DMode,
    ExperimentConfig,
    ProportionResult,
    coverage_experiment,
    proportion_experiment,
    run_table,
)
from .intervals import (
    FunctionalBoundRequest,
    Interval,
    Shape,
    ci_mean,
    functional_lower_bound,
    one_sided_bound,
    z_quantile,
)
from .memory import MemoryEstimate, local_whittle, periodogram
from .pivots import (
    VarianceComponents,
    g_n,
    g_n_stu,
    randomized_abs_sum,
    randomized_signed_sum,
    t_n_stu,
    t_star,
    t_star_short,
    t_star_stu,
    tstar_variance_diagnostic,
    variance_components,
)
from .process import (
    InnovationDist,
    ProcessSpec,
    farima_ma_coeffs,
    simulate,
    theoretical_acvf,
)
from .rng import child_stream
from .weights import (
    abs_lag_product_sum,
    draw_weights,
    exact_abs_cross_moment,
    moment_b,
    sum_sq_centered,
)

__version__ = "0.1.0"
