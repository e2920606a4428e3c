"""Skewness of partial sums of short- and long-memory linear processes."""

from .analytic import (
    AnalyticConstants,
    analytic_constants,
    delta_theoretical,
    exact_moments_oracle,
    k_of_d,
    moment_limit,
    tail_integral,
    variance_constant,
)
from .estimators import (
    BandwidthPlan,
    SkewEstimate,
    default_bandwidths,
    delta_bar,
    delta_bar2,
    estimate_d_gph,
    k_hat,
    long_run_variance,
    s3_bar,
    sample_autocov,
)
from .montecarlo import ExperimentConfig, MseRow, emit_table, run_experiment
from .process import (
    InnovationSpec,
    LinearProcessSpec,
    MACoefficients,
    ModelError,
    choose_truncation,
    coefficient_sum_m,
    expand_ma,
)
from .simulate import SamplePath, innovation_moments, simulate_path

__version__ = "0.1.0"
