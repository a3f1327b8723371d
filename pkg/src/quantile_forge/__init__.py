"""Sample quantile estimators with exponential-model bias correction,
plus a reproducible Monte Carlo benchmark harness."""

from .distributions import DistributionSpec, cdf, normal_inv_cdf, quantile, sample
from .estimators import (
    EstimatorId,
    SortedSample,
    WeightVector,
    estimate,
    exp_order_stat_mean,
    exp_order_stat_var,
    expon_frac,
    hf_quantile,
    optimal_weights,
    q7_exp_bias,
    q10_quantile,
    q11_general,
    q11_mle,
    q11_variance,
)
from .rng import RngStream
from .simulation import (
    CellMetrics,
    CellSpec,
    MomentAccumulator,
    run_cell,
    run_grid,
    zero_bias_quantile_search,
)

__version__ = "0.1.0"
