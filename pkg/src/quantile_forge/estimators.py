"""Closed-form sample quantile estimators.

Every estimator here is a fixed linear combination of order statistics, so
each function accepts either a :class:`SortedSample` or an array that is
sorted along its last axis.  Passing a 2-D ``(trials, n)`` array evaluates a
whole batch of samples at once, which is what the Monte Carlo harness does.

Included are the nine Hyndman-Fan types, the exponential bias-removing
interpolation (``Q10``), the minimum-variance unbiased family for the
exponential model (``Q11``) and its limit, the exponential MLE quantile.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "ANALYTIC_TOL",
    "ALGEBRAIC_TOL",
    "EstimatorId",
    "SortedSample",
    "WeightVector",
    "estimate",
    "exp_order_stat_mean",
    "exp_order_stat_var",
    "expon_frac",
    "hf_quantile",
    "optimal_weights",
    "q7_exp_bias",
    "q10_quantile",
    "q11_general",
    "q11_mle",
    "q11_variance",
    "type7_index",
]

#: tolerance for identities that involve logs / harmonic sums
ANALYTIC_TOL = 1e-10
#: tolerance for purely algebraic rearrangements
ALGEBRAIC_TOL = 1e-12

# snaps plotting positions that land a few ulps off an integer
_FUZZ = 4 * np.finfo(float).eps


class SortedSample:
    """An ascending, finite, non-empty vector of observations."""

    __slots__ = ("values",)

    def __init__(self, values: ArrayLike):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("sample must be one-dimensional")
        if arr.size == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains NaN or infinite values")
        if np.any(np.diff(arr) < 0):
            raise ValueError("sample is not sorted ascending")
        arr.flags.writeable = False
        self.values = arr

    @classmethod
    def from_unsorted(cls, values: ArrayLike) -> "SortedSample":
        return cls(np.sort(np.asarray(values, dtype=float)))

    @property
    def n(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"SortedSample({self.values.tolist()!r})"


SampleLike = Union[SortedSample, ArrayLike]


def _as_sorted(sample: SampleLike) -> NDArray[np.float64]:
    if isinstance(sample, SortedSample):
        return sample.values
    x = np.asarray(sample, dtype=float)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("sample is empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains NaN or infinite values")
    if np.any(np.diff(x, axis=-1) < 0):
        raise ValueError("sample is not sorted ascending along its last axis")
    return x


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in the open interval (0, 1), got {q!r}")
    return q


def _result(value: NDArray[np.float64]):
    return float(value) if np.ndim(value) == 0 else np.array(value, copy=True)


def _order_stat(x: NDArray[np.float64], k) -> NDArray[np.float64]:
    """1-based order statistic X_(k) along the last axis, k clamped to [1, n]."""
    n = x.shape[-1]
    return x[..., min(max(int(k), 1), n) - 1]


def _lerp(lo, hi, g: float):
    out = lo + g * (hi - lo)
    # keeps the result inside [lo, hi] despite rounding
    return np.clip(out, lo, hi)


# ---------------------------------------------------------------------------
# Hyndman-Fan types 1-9
# ---------------------------------------------------------------------------

# (a, b) plotting-position constants: h = a + q * (n + 1 - a - b)
_CONTINUOUS_AB = {
    4: (0.0, 1.0),
    5: (0.5, 0.5),
    6: (0.0, 0.0),
    7: (1.0, 1.0),
    8: (1.0 / 3.0, 1.0 / 3.0),
    9: (3.0 / 8.0, 3.0 / 8.0),
}


def _split_position(h: float) -> tuple[int, float]:
    j = math.floor(h + _FUZZ)
    g = h - j
    if abs(g) < _FUZZ:
        g = 0.0
    return j, g


def type7_index(q: float, n: int) -> tuple[int, float]:
    """Lower order-statistic index i = floor(q(n-1)) + 1 and fractional part."""
    j, g = _split_position(q * (n - 1))
    return j + 1, g


def hf_quantile(sample: SampleLike, q: float, type: int = 7):
    """Sample quantile using one of the nine Hyndman-Fan definitions.

    Parameters
    ----------
    sample : SortedSample or array_like
        Observations sorted ascending along the last axis.
    q : float
        Probability in (0, 1).
    type : int
        Estimator type, 1 through 9.  Type 7 is the default of R and numpy.

    Returns
    -------
    float or ndarray
        One estimate per sample (scalar for a 1-D input).
    """
    if type not in range(1, 10):
        raise ValueError(f"type must be an integer in 1..9, got {type!r}")
    x = _as_sorted(sample)
    q = _check_q(q)
    n = x.shape[-1]

    if type <= 3:
        nq = n * q - (0.5 if type == 3 else 0.0)
        j = math.floor(nq + _FUZZ)
        above = nq > j
        if type == 1:
            g = 1.0 if above else 0.0
        elif type == 2:
            g = 1.0 if above else 0.5
        else:
            g = 1.0 if (above or j % 2 == 1) else 0.0
        lo, hi = _order_stat(x, j), _order_stat(x, j + 1)
        if g == 0.0:
            return _result(lo)
        if g == 1.0:
            return _result(hi)
        return _result(0.5 * (lo + hi))

    a, b = _CONTINUOUS_AB[type]
    j, g = _split_position(a + q * (n + 1 - a - b))
    lo, hi = _order_stat(x, j), _order_stat(x, j + 1)
    if g == 0.0 or j >= n or j < 1:
        return _result(lo)
    return _result(_lerp(lo, hi, g))


# ---------------------------------------------------------------------------
# Exponential order statistics
# ---------------------------------------------------------------------------


def _check_n_i(n: int, i: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= i <= n:
        raise ValueError(f"order index i must satisfy 0 <= i <= n, got i={i}, n={n}")


def exp_order_stat_mean(n: int, i: int) -> float:
    """E[X_(i)] for n unit-rate exponentials: sum_{j=1..i} 1/(n-j+1)."""
    _check_n_i(n, i)
    return math.fsum(1.0 / (n - j + 1) for j in range(1, i + 1))


def exp_order_stat_var(n: int, i: int) -> float:
    """Var[X_(i)] for n unit-rate exponentials: sum_{j=1..i} 1/(n-j+1)^2."""
    _check_n_i(n, i)
    return math.fsum(1.0 / (n - j + 1) ** 2 for j in range(1, i + 1))


def _check_n2(n: int) -> None:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")


def q7_exp_bias(q: float, n: int) -> float:
    """Bias of the type-7 estimator on unit exponential data.

    Expected estimate minus the true quantile ``-log(1 - q)``.  Positive
    values mean the estimator overshoots.
    """
    q = _check_q(q)
    _check_n2(n)
    i, frac = type7_index(q, n)
    return exp_order_stat_mean(n, i) + frac / (n - i) + math.log1p(-q)


def expon_frac(q: float, n: int) -> float:
    """Interpolation weight on X_(i+1) that makes the estimate unbiased for
    exponential data.  May be negative or larger than one."""
    q = _check_q(q)
    _check_n2(n)
    i, _ = type7_index(q, n)
    return (n - i) * (-math.log1p(-q) - exp_order_stat_mean(n, i))


def q10_quantile(sample: SampleLike, q: float):
    """Type-7 style interpolation with the exponential-unbiased weight."""
    x = _as_sorted(sample)
    q = _check_q(q)
    n = x.shape[-1]
    if n < 2:
        raise ValueError("Q10 needs at least two observations")
    i, _ = type7_index(q, n)
    f = expon_frac(q, n)
    lo, hi = x[..., i - 1], x[..., i]
    return _result(lo + f * (hi - lo))


# ---------------------------------------------------------------------------
# Minimum-variance unbiased family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightVector:
    """Optimal weights of ``f*X_(i) + sum_k fs[k-1]*X_(i+k)``.

    ``f`` is ``None`` when ``i == 0``, where the anchor is the support
    minimum 0 and carries no weight.  ``analytic_variance`` is for unit rate.
    """

    n: int
    i: int
    m: int
    q: float
    f: Optional[float]
    fs: tuple[float, ...]
    beta: float
    analytic_variance: float

    def expectation(self) -> float:
        """Unit-rate expectation of the weighted estimator (Renyi form)."""
        tail = 0.0
        terms = []
        for k in range(self.m, 0, -1):
            tail += self.fs[k - 1]
            terms.append(tail / (self.n - self.i - k + 1))
        return exp_order_stat_mean(self.n, self.i) + math.fsum(terms)

    def as_array(self) -> NDArray[np.float64]:
        """Dense length-n weights over X_(1)..X_(n)."""
        w = np.zeros(self.n)
        if self.i >= 1:
            w[self.i - 1] = self.f
        w[self.i : self.i + self.m] = self.fs
        return w


def _check_weight_args(n: int, i: int, m: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= i <= n - 1:
        raise ValueError(f"i must satisfy 0 <= i <= n-1, got i={i}, n={n}")
    if not 1 <= m <= n - i:
        raise ValueError(f"m must satisfy 1 <= m <= n-i, got m={m}, n-i={n - i}")


def optimal_weights(n: int, i: int, m: int, q: float) -> WeightVector:
    """Minimum-variance weights that keep the estimator unbiased under the
    exponential model, using the m order statistics above X_(i)."""
    _check_weight_args(n, i, m)
    q = _check_q(q)
    b = exp_order_stat_mean(n, i) + math.log1p(-q)
    beta = 2.0 * b / m
    fs = [-beta / 2.0] * (m - 1) + [-beta * (n - i - m + 1) / 2.0]
    f = 1.0 - math.fsum(fs) if i >= 1 else None
    variance = exp_order_stat_var(n, i) + b * b / m
    return WeightVector(n, i, m, q, f, tuple(fs), beta, variance)


def q11_variance(n: int, i: int, m: int, q: float) -> float:
    """Unit-rate variance of the optimally weighted estimator."""
    return optimal_weights(n, i, m, q).analytic_variance


def q11_general(sample: SampleLike, q: float, i: int, m: int):
    x = _as_sorted(sample)
    w = optimal_weights(x.shape[-1], i, m, q)
    out = x[..., i : i + m] @ np.asarray(w.fs)
    if i >= 1:
        out = out + w.f * x[..., i - 1]
    return _result(out)


def q11_mle(sample: SampleLike, q: float):
    """Quantile of the exponential fitted by maximum likelihood."""
    x = _as_sorted(sample)
    q = _check_q(q)
    return _result(-np.mean(x, axis=-1) * math.log1p(-q))


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_TAG_RE = re.compile(r"^(?:HF([1-9])|Q10|Q11MLE|Q11:(\d+):(\d+))$")


@dataclass(frozen=True)
class EstimatorId:
    """Identifies an estimator.

    ``kind`` is one of ``"HF"``, ``"Q10"``, ``"Q11"``, ``"MLE"``.  ``hf_type``
    is set for ``HF``, ``i``/``m`` for ``Q11``.  The canonical text form
    (:attr:`tag`) is ``HF1``..``HF9``, ``Q10``, ``Q11:<i>:<m>`` or ``Q11MLE``.
    """

    kind: str
    hf_type: Optional[int] = None
    i: Optional[int] = None
    m: Optional[int] = None
    tag: str = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "HF":
            if self.hf_type not in range(1, 10):
                raise ValueError(f"HF type must be 1..9, got {self.hf_type!r}")
            tag = f"HF{self.hf_type}"
        elif self.kind == "Q10":
            tag = "Q10"
        elif self.kind == "Q11":
            if self.i is None or self.m is None or self.i < 0 or self.m < 1:
                raise ValueError("Q11 needs i >= 0 and m >= 1")
            tag = f"Q11:{self.i}:{self.m}"
        elif self.kind == "MLE":
            tag = "Q11MLE"
        else:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        object.__setattr__(self, "tag", tag)

    @classmethod
    def hf(cls, hf_type: int) -> "EstimatorId":
        return cls("HF", hf_type=hf_type)

    @classmethod
    def parse(cls, text: str) -> "EstimatorId":
        match = _TAG_RE.match(text.strip().upper())
        if match is None:
            raise ValueError(
                f"unknown estimator {text!r}; expected HF1..HF9, Q10, Q11:<i>:<m> or Q11MLE"
            )
        hf_type, i, m = match.groups()
        if hf_type:
            return cls.hf(int(hf_type))
        if i is not None:
            return cls("Q11", i=int(i), m=int(m))
        return cls("MLE") if "MLE" in text.upper() else cls("Q10")

    def validate(self, n: int) -> None:
        """Raise ValueError if this estimator cannot be evaluated at size n."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if self.kind == "Q10" and n < 2:
            raise ValueError("Q10 needs n >= 2")
        if self.kind == "Q11":
            _check_weight_args(n, self.i, self.m)

    def __str__(self) -> str:
        return self.tag


def estimate(sample: SampleLike, q: float, id: EstimatorId):
    """Evaluate the estimator named by ``id``."""
    if id.kind == "HF":
        return hf_quantile(sample, q, id.hf_type)
    if id.kind == "Q10":
        return q10_quantile(sample, q)
    if id.kind == "Q11":
        return q11_general(sample, q, id.i, id.m)
    return q11_mle(sample, q)
