"""Empirical estimators of the skewness of partial sums.

Long sums over the series use numpy's pairwise summation, which is
deterministic for a given array and accurate to O(eps log n); short lists of
lag terms are combined with :func:`math.fsum`.  The series is always
centered at its sample mean, which makes every estimator location invariant.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class BandwidthPlan:
    """Bandwidths: q0 for the long-run variance, q1..q3 for the third moment."""

    q0: int
    q1: int
    q2: int
    q3: int

    def __post_init__(self):
        for name in ("q0", "q1", "q2", "q3"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer")
            object.__setattr__(self, name, int(v))
        if self.q3 < 2:
            raise ValueError("q3 must be >= 2")

    def validate(self, n: int) -> None:
        too_big = [name for name, v in asdict(self).items() if v >= n]
        if too_big:
            raise ValueError(f"bandwidths {too_big} must be smaller than n={n}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SkewEstimate:
    """Result of :func:`k_hat`; ``flagged`` marks a nonpositive v_hat."""

    s3_bar: float
    v_hat: float
    k_hat: float
    d_used: float
    bandwidths: BandwidthPlan
    n: int
    flagged: bool = False

    def to_dict(self) -> dict:
        doc = asdict(self)
        if not math.isfinite(self.k_hat):
            doc["k_hat"] = None
        return doc


def _ceil(x: float) -> int:
    # n**0.5 and friends may land a few ulps above an exact integer
    return math.ceil(round(x, 9))


def default_bandwidths(n: int, d: float) -> BandwidthPlan:
    """Bandwidth rule of thumb.

    Long memory: q1 = q2 = ceil(n^0.2), q3 = max(2, ceil(n^0.1)),
    q0 = ceil(n^(0.5 - d)).  Short memory: every bandwidth is ceil(n^0.33).
    """
    if n < 8:
        raise ValueError("default bandwidths need n >= 8")
    if d > 0:
        q12 = _ceil(n**0.2)
        return BandwidthPlan(q0=_ceil(n ** (0.5 - d)), q1=q12, q2=q12,
                             q3=max(2, _ceil(n**0.1)))
    q = max(2, _ceil(n**0.33))
    return BandwidthPlan(q0=q, q1=q, q2=q, q3=q)


def _centered(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("series must be a non-empty 1-d array")
    return x - math.fsum(x.tolist()) / x.size


def _sum(v: np.ndarray) -> float:
    # elementwise products then pairwise summation; no BLAS, so no thread dependence
    return float(np.sum(v))


def _autocov(y: np.ndarray, h: int) -> float:
    n = y.size
    return _sum(y[: n - h] * y[h:]) / n


def _delta(y: np.ndarray, h: int) -> float:
    n = y.size
    if h == 0:
        return _sum(y**3) / n
    lo, hi = y[: n - h], y[h:]
    return _sum(lo * hi * (lo + hi)) / n


def _delta2(y: np.ndarray, h: int, hp: int) -> float:
    n = y.size
    span = h + hp
    return _sum(y[: n - span] * y[h: n - hp] * y[span:]) / n


def _check_lag(h: int, n: int) -> None:
    if h < 0 or h >= n:
        raise ValueError(f"lag {h} outside [0, {n})")


def sample_autocov(x, h: int) -> float:
    """gamma_hat(h) = (1/n) sum_{j=1}^{n-h} (X_j - Xbar)(X_{j+h} - Xbar)."""
    y = _centered(x)
    _check_lag(h, y.size)
    return _autocov(y, h)


def _lrv(y: np.ndarray, d: float, q0: int) -> float:
    terms = [_autocov(y, 0)]
    terms += [2 * (1 - h / q0) * _autocov(y, h) for h in range(1, q0)]
    return q0 ** (-2 * d) * math.fsum(terms)


def long_run_variance(x, d: float, q0: int) -> float:
    """Bartlett-weighted long-run variance estimate.

        q0^(-2d) (gamma_hat(0) + 2 sum_{h=1}^{q0} (1 - h/q0) gamma_hat(h))

    The result can be zero or negative on degenerate samples; callers decide
    what to do with it (see :func:`k_hat`).
    """
    y = _centered(x)
    if not 1 <= q0 < y.size:
        raise ValueError(f"q0 must be in [1, n), got {q0}")
    return _lrv(y, d, q0)


def delta_bar(x, h: int) -> float:
    """Empirical third-order covariance.

    For h >= 1, (1/n) sum_j [Y_j^2 Y_{j+h} + Y_j Y_{j+h}^2] with Y = X - Xbar;
    for h = 0 the single cube (1/n) sum_j Y_j^3.
    """
    y = _centered(x)
    _check_lag(h, y.size)
    return _delta(y, h)


def delta_bar2(x, h: int, h_prime: int) -> float:
    """(1/n) sum_{j=1}^{n-h-h'} Y_j Y_{j+h} Y_{j+h+h'} with Y = X - Xbar."""
    y = _centered(x)
    if h < 1 or h_prime < 1:
        raise ValueError("h and h_prime must be >= 1")
    if h + h_prime >= y.size:
        raise ValueError(f"h + h_prime must be < n={y.size}")
    return _delta2(y, h, h_prime)


def _s3(y: np.ndarray, d: float, plan: BandwidthPlan) -> float:
    q1, q2, q3 = plan.q1, plan.q2, plan.q3
    n = y.size
    single = [(1 - h / q2) * _delta(y, h) for h in range(1, q2 + 1)]
    double = []
    for h in range(1, q3):
        pair = y[: n - h] * y[h:]
        for hp in range(1, q3 - h + 1):
            span = h + hp
            double.append((1 - (h + hp) / q3) * _sum(pair[: n - span] * y[span:]) / n)
    return math.fsum([
        q1 ** (-3 * d) * _delta(y, 0),
        3 * q2 ** (-3 * d) * math.fsum(single),
        6 * q3 ** (-3 * d) * math.fsum(double),
    ])


def s3_bar(x, d: float, plan: BandwidthPlan) -> float:
    """Estimator of the normalized third moment n^(-1-3d) E[S_n^3].

        q1^(-3d) D(0) + 3 q2^(-3d) sum_{h=1}^{q2} (1 - h/q2) D(h)
          + 6 q3^(-3d) sum_{h=1}^{q3-1} sum_{h'=1}^{q3-h} (1 - (h+h')/q3) D(h, h')

    with D = :func:`delta_bar` and D(h, h') = :func:`delta_bar2`.
    """
    y = _centered(x)
    plan.validate(y.size)
    return _s3(y, d, plan)


def k_hat(x, d: float, plan: BandwidthPlan | None = None) -> SkewEstimate:
    """Estimate the scaled skewness sqrt(n) * E[S_n^3] / Var(S_n)^(3/2).

    The estimate is s3_bar / v_hat^(3/2) with v_hat from
    :func:`long_run_variance` at bandwidth q0.  When v_hat <= 0 the ratio is
    undefined: the result carries ``k_hat = nan`` and ``flagged = True``.

    Parameters
    ----------
    x : array_like
        Observed series, length >= 8.
    d : float
        Memory parameter (known or estimated).
    plan : BandwidthPlan, optional
        Defaults to :func:`default_bandwidths`.
    """
    y = _centered(x)
    n = y.size
    if n < 8:
        raise ValueError("k_hat needs at least 8 observations")
    if plan is None:
        plan = default_bandwidths(n, d)
    plan.validate(n)
    # k_hat is scale free; work on a unit-range copy so v^1.5 cannot underflow
    scale = float(np.abs(y).max())
    if scale == 0.0:
        return SkewEstimate(0.0, 0.0, math.nan, d, plan, n, flagged=True)
    z = y / scale
    s3 = _s3(z, d, plan)
    v = _lrv(z, d, plan.q0)
    if v > 0:
        return SkewEstimate(s3 * scale**3, v * scale**2, s3 / v**1.5, d, plan, n)
    return SkewEstimate(s3 * scale**3, v * scale**2, math.nan, d, plan, n, flagged=True)


def estimate_d_gph(x, bandwidth_frac: float = 0.5) -> float:
    """Log-periodogram (GPH) estimate of d, clamped to [0, 0.499].

    Regresses log I(w_j) on -2 log|2 sin(w_j / 2)| over the first
    ceil(n^bandwidth_frac) Fourier frequencies; the slope is d.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 64:
        raise ValueError("GPH estimation needs n >= 64")
    if not 0 < bandwidth_frac <= 0.8:
        raise ValueError("bandwidth_frac must be in (0, 0.8]")
    y = x - x.mean()
    if not np.any(np.abs(y) > 1e-12 * max(1.0, np.abs(x).max())):
        raise EstimationError("series has zero variance")
    m = min(_ceil(n**bandwidth_frac), (n - 1) // 2)
    j = np.arange(1, m + 1)
    w = 2 * np.pi * j / n
    dft = np.fft.rfft(y)[1: m + 1]
    periodogram = np.abs(dft) ** 2 / (2 * np.pi * n)
    if np.any(periodogram <= 0):
        raise EstimationError("periodogram vanishes at a Fourier frequency")
    regressor = -2 * np.log(np.abs(2 * np.sin(w / 2)))
    slope = np.polyfit(regressor, np.log(periodogram), 1)[0]
    return float(min(max(slope, 0.0), 0.499))
