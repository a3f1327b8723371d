"""Monte Carlo measurement of estimator bias, variance and MSE."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import DistributionSpec, quantile
from .estimators import EstimatorId, estimate, q7_exp_bias
from .rng import RngStream, stable_hash64

__all__ = [
    "CellError",
    "CellMetrics",
    "CellSpec",
    "MomentAccumulator",
    "find_zero_bias_bracket",
    "run_cell",
    "run_grid",
    "zero_bias_quantile_search",
]

# trials simulated per vectorised block; fixed so results never depend on it
CHUNK_TRIALS = 50_000

BISECTION_TOL = 1e-10
BISECTION_MAX_ITER = 200


class MomentAccumulator:
    """Streaming mean and sum of squared deviations.

    Single values use Welford's update; blocks are folded in with the
    pairwise (Chan et al.) merge, so feeding the same data in different
    block sizes agrees to rounding.
    """

    __slots__ = ("count", "mean", "m2")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def update_batch(self, values) -> None:
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            return
        block_mean = float(np.mean(values))
        block_m2 = float(np.sum((values - block_mean) ** 2))
        self._merge(values.size, block_mean, block_m2)

    def merge(self, other: "MomentAccumulator") -> None:
        self._merge(other.count, other.mean, other.m2)

    def _merge(self, count: int, mean: float, m2: float) -> None:
        if count == 0:
            return
        total = self.count + count
        delta = mean - self.mean
        self.mean += delta * count / total
        self.m2 += m2 + delta * delta * self.count * count / total
        self.count = total

    @property
    def variance(self) -> float:
        """Unbiased sample variance (0 for fewer than two values)."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def population_variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0


@dataclass(frozen=True)
class CellSpec:
    dist: DistributionSpec
    estimator: EstimatorId
    n: int
    q: float
    trials: int
    seed: int

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError(f"sample size n must be >= 2, got {self.n}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.estimator.validate(self.n)

    @property
    def stream_id(self) -> int:
        # depends only on the cell's own content, so grids can grow freely
        return stable_hash64(
            self.dist.family, self.dist.params, self.estimator.tag, self.n, float(self.q).hex()
        )

    def describe(self) -> str:
        return f"{self.dist} {self.estimator.tag} n={self.n} q={self.q!r}"


@dataclass(frozen=True)
class CellMetrics:
    bias: float
    variance: float
    mse: float
    se_bias: float
    true_quantile: float
    trials: int


class CellError(ValueError):
    """An invalid cell inside a grid; ``index`` is its position."""

    def __init__(self, index: int, cell: CellSpec, reason: str):
        super().__init__(f"cell {index} ({cell.describe()}): {reason}")
        self.index = index
        self.cell = cell


def run_cell(spec: CellSpec) -> CellMetrics:
    """Simulate ``spec.trials`` fresh samples and summarise the estimator's
    deviations from the true quantile."""
    spec.validate()
    truth = quantile(spec.dist, spec.q)
    rng = RngStream(spec.seed, spec.stream_id)
    acc = MomentAccumulator()
    remaining = spec.trials
    while remaining:
        block = min(remaining, CHUNK_TRIALS)
        draws = quantile(spec.dist, rng.uniforms(block * spec.n))
        samples = np.sort(np.reshape(draws, (block, spec.n)), axis=1)
        acc.update_batch(np.asarray(estimate(samples, spec.q, spec.estimator)) - truth)
        remaining -= block

    bias = acc.mean
    variance = acc.variance
    return CellMetrics(
        bias=bias,
        variance=variance,
        mse=bias * bias + acc.population_variance,
        se_bias=math.sqrt(variance / spec.trials),
        true_quantile=truth,
        trials=spec.trials,
    )


def run_grid(
    cells: Sequence[CellSpec], threads: Optional[int] = 1
) -> list[tuple[CellSpec, CellMetrics]]:
    """Run every cell, returning results in input order.

    All cells are validated before any simulation starts; the first invalid
    one raises :class:`CellError`.
    """
    cells = list(cells)
    if not cells:
        raise ValueError("grid is empty")
    for index, cell in enumerate(cells):
        try:
            cell.validate()
        except ValueError as exc:
            raise CellError(index, cell, str(exc)) from None

    if threads is None or threads <= 1:
        metrics = [run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            metrics = list(pool.map(run_cell, cells))
    return list(zip(cells, metrics))


def zero_bias_quantile_search(
    n: int, lo: float, hi: float, tol: float = BISECTION_TOL, max_iter: int = BISECTION_MAX_ITER
) -> float:
    """Quantile level at which the type-7 estimator is unbiased for
    exponential data, by bisection on the analytic bias over ``[lo, hi]``.

    The bias is only piecewise smooth in q, hence bisection.
    """
    f_lo, f_hi = q7_exp_bias(lo, n), q7_exp_bias(hi, n)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError(f"bias has the same sign at q={lo} and q={hi}; no bracketed root")

    best_q, best_f = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = q7_exp_bias(mid, n)
        if abs(f_mid) < abs(best_f):
            best_q, best_f = mid, f_mid
        if abs(f_mid) <= tol or mid in (lo, hi):
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    if abs(best_f) > tol:
        raise ArithmeticError(f"bisection stalled at q={best_q!r} with bias {best_f!r}")
    return best_q


def find_zero_bias_bracket(n: int, step: float = 0.01) -> tuple[float, float]:
    """First adjacent pair on the ``step`` grid where the type-7 bias changes sign."""
    count = int(round(1.0 / step))
    grid = [round(k * step, 12) for k in range(1, count)]
    prev_q, prev_b = grid[0], q7_exp_bias(grid[0], n)
    for q in grid[1:]:
        b = q7_exp_bias(q, n)
        if prev_b == 0.0 or (b > 0) != (prev_b > 0):
            return prev_q, q
        prev_q, prev_b = q, b
    raise ArithmeticError(f"type-7 bias never changes sign on the {step} grid for n={n}")
