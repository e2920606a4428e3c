"""Closed-form and limit quantities for partial sums of linear processes.

Everything here is deterministic: the tail integrals

    I_p(d) = int_0^inf ((1 + x)^d - x^d)^p dx,

the limiting scaled skewness k(d), the long-run variance constant v(d), the
limits of n^(-e) E[S_n^k], and exact finite-n second and third moments of
S_n = X_1 + ... + X_n computed from the MA weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate

from .process import InnovationSpec, LinearProcessSpec, MACoefficients, coefficient_sum_m

QUAD_EPSABS = 1e-14
QUAD_EPSREL = 1e-13
QUAD_LIMIT = 500


class DomainError(ValueError):
    pass


def _check_d(d: float) -> None:
    if not 0.0 <= d < 0.5:
        raise DomainError(f"d={d} outside [0, 0.5)")


def _quad(f, a, b, **kw) -> float:
    value, _ = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                              limit=QUAD_LIMIT, **kw)
    return value


def _upper_tail(p: int, d: float, x0: float) -> float:
    """int_{x0}^inf ((1 + x)^d - x^d)^p dx for x0 >= 1.

    With x = 1/t the integrand becomes t^(p(1-d)-2) * (((1+t)^d - 1)/t)^p on
    (0, 1/x0]; the algebraic factor goes into the quadrature weight and the
    remaining factor is smooth with limit d^p at t = 0.
    """

    def smooth(t):
        if t == 0.0:
            return d**p
        return (math.expm1(d * math.log1p(t)) / t) ** p

    return _quad(smooth, 0.0, 1.0 / x0, weight="alg", wvar=(p * (1 - d) - 2, 0.0))


@lru_cache(maxsize=256)
def tail_integral(p: int, d: float) -> float:
    """I_p(d) = int_0^inf ((1 + x)^d - x^d)^p dx, zero for d = 0.

    Split at x = 1: adaptive Gauss-Kronrod on [0, 1], and the reciprocal
    substitution of :func:`_upper_tail` on [1, inf).
    """
    _check_d(d)
    if int(p) != p or p < 2:
        raise DomainError("p must be an integer >= 2")
    if d == 0:
        return 0.0
    head = _quad(lambda x: ((1 + x) ** d - x**d) ** p, 0.0, 1.0)
    return head + _upper_tail(p, d, 1.0)


def k_of_d(d: float, eta: float, sigma2: float) -> float:
    """Limit of sqrt(n) * E[S_n^3] / Var(S_n)^(3/2)."""
    _check_d(d)
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    if d == 0:
        return eta / sigma2**1.5
    third = 1 / (1 + 3 * d) + tail_integral(3, d)
    second = 1 / (1 + 2 * d) + tail_integral(2, d)
    return eta / sigma2**1.5 * third / second**1.5


def variance_constant(d: float, sigma2: float, m: float) -> float:
    """v(d) = sigma2 m(d)^2 (1/(1+2d) + I_2(d)), the limit of n^(-1-2d) Var S_n."""
    _check_d(d)
    return sigma2 * m * m * (1 / (1 + 2 * d) + tail_integral(2, d))


@dataclass(frozen=True)
class AnalyticConstants:
    d: float
    m: float
    I2: float
    I3: float
    k: float
    v: float
    sigma2: float
    eta: float

    def to_dict(self) -> dict:
        return asdict(self)


def analytic_constants(spec: LinearProcessSpec) -> AnalyticConstants:
    innov = spec.innovation
    d = spec.d
    m = coefficient_sum_m(spec)
    return AnalyticConstants(
        d=d,
        m=m,
        I2=tail_integral(2, d),
        I3=tail_integral(3, d),
        k=k_of_d(d, innov.eta, innov.sigma2),
        v=variance_constant(d, innov.sigma2, m),
        sigma2=innov.sigma2,
        eta=innov.eta,
    )


def moment_limit(k: int, d: float, eta: float, sigma2: float, m: float) -> tuple[float, float]:
    """Leading behaviour E[S_n^k] ~ limit * n^exponent.

    Returns ``(limit, exponent)``.  Even k = 2p pairs innovations two by two,
    giving exponent p(1 + 2d); odd k = 3 + 2l needs one triple on top of l
    pairs, giving exponent k(1 + 2d)/2 - 1/2.
    """
    if int(k) != k or k < 2:
        raise ValueError("moment order k must be an integer >= 2")
    _check_d(d)
    k = int(k)
    sigma = math.sqrt(sigma2)
    second = 1 / (1 + 2 * d) + tail_integral(2, d)
    if k % 2 == 0:
        p = k // 2
        pairings = math.factorial(k) / (2**p * math.factorial(p))
        return m**k * sigma**k * pairings * second**p, p * (1 + 2 * d)
    ell = (k - 3) // 2
    third = 1 / (1 + 3 * d) + tail_integral(3, d)
    pairings = math.comb(k, 3) * math.factorial(2 * ell) / (2**ell * math.factorial(ell))
    limit = m**k * eta * sigma ** (k - 3) * pairings * third * second**ell
    return limit, k * (1 + 2 * d) / 2 - 0.5


def _fsum(v: np.ndarray) -> float:
    return math.fsum(v.tolist())


def window_sums(coeffs: MACoefficients, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights of each innovation in S_n for the truncated process.

    Returns ``(inside, before)``: ``inside[j-1]`` is the weight of eps_j for
    j = 1..n, i.e. a_0 + ... + a_{n-j}; ``before[u]`` is the weight of
    eps_{-u} for u = 0..M-1, i.e. a_{u+1} + ... + a_{u+n}.
    """
    M = coeffs.truncation_M
    A = coeffs.cumulative
    inside = A[np.minimum(np.arange(n - 1, -1, -1), M)]
    u = np.arange(M)
    before = A[np.minimum(u + n, M)] - A[u]
    return inside, before


def exact_moments_oracle(coeffs: MACoefficients, n: int, innov: InnovationSpec,
                         include_tail: bool = False) -> tuple[float, float]:
    """Exact Var(S_n) and E[S_n^3] from the MA weights.

    Writing S_n = sum_j b_j eps_j with window sums b_j,

        Var S_n = sigma2 * sum_j b_j^2,    E S_n^3 = eta * sum_j b_j^3.

    By default the moments are those of the truncated process that
    :func:`lpskew.simulate.simulate_path` generates.  With
    ``include_tail=True`` and long-memory weights carrying ``c``, innovations
    more than M - n steps in the past are instead accounted for with the
    asymptotic weights a_i ~ c i^(d-1), approximating the untruncated
    process.  That needs M >= n.

    Returns
    -------
    (ES2, ES3) : tuple of float
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    inside, before = window_sums(coeffs, n)
    d, c = coeffs.d, coeffs.c
    tail2 = tail3 = 0.0
    if include_tail and d > 0:
        if c is None:
            raise ValueError("long-memory tail needs the constant c on the coefficients")
        M = coeffs.truncation_M
        if M < n:
            raise ValueError("include_tail needs truncation M >= n")
        before = before[: M - n + 1]
        # sum_{u > M-n} b(u)^p ~ int_{M-n+1}^inf ((c/d)((v+n)^d - v^d))^p dv
        x0 = (M - n + 1) / n
        scale = c / d
        tail2 = scale**2 * n ** (1 + 2 * d) * _upper_tail(2, d, x0)
        tail3 = scale**3 * n ** (1 + 3 * d) * _upper_tail(3, d, x0)
    s2 = math.fsum([_fsum(inside**2), _fsum(before**2), tail2])
    s3 = math.fsum([_fsum(inside**3), _fsum(before**3), tail3])
    return innov.sigma2 * s2, innov.eta * s3


def normalized_third_moment(coeffs: MACoefficients, n: int, innov: InnovationSpec,
                            include_tail: bool = False) -> float:
    """n^(-1-3d) E[S_n^3], the finite-n target of the third-moment estimator."""
    _, es3 = exact_moments_oracle(coeffs, n, innov, include_tail)
    return es3 / n ** (1 + 3 * coeffs.d)


def scaled_skewness(coeffs: MACoefficients, n: int, innov: InnovationSpec,
                    include_tail: bool = False) -> float:
    """sqrt(n) * E[S_n^3] / Var(S_n)^(3/2) at finite n."""
    es2, es3 = exact_moments_oracle(coeffs, n, innov, include_tail)
    return math.sqrt(n) * es3 / es2**1.5


def delta_theoretical(coeffs: MACoefficients, h: int, h_prime: Optional[int],
                      innov: InnovationSpec) -> float:
    """Third-order covariances of the process.

    Delta(h) = E X_1 X_{1+h}^2 + E X_1^2 X_{1+h} for h >= 1, Delta(0) = E X_1^3
    (one cube, not two), and Delta(h, h') = E X_1 X_{1+h} X_{1+h+h'}.
    """
    if h < 0:
        raise ValueError("h must be >= 0")
    a = coeffs.a[: coeffs.support]
    L = a.size
    if h_prime is None:
        if h == 0:
            return innov.eta * _fsum(a**3)
        if h >= L:
            return 0.0
        lo, hi = a[: L - h], a[h:]
        return innov.eta * math.fsum([_fsum(lo * lo * hi), _fsum(lo * hi * hi)])
    if h_prime < 1:
        raise ValueError("h_prime must be >= 1")
    span = h + h_prime
    if span >= L:
        return 0.0
    return innov.eta * _fsum(a[: L - span] * a[h: L - h_prime] * a[span:])


def autocov_theoretical(coeffs: MACoefficients, h: int, innov: InnovationSpec) -> float:
    """gamma(h) = sigma2 * sum_i a_i a_{i+h}."""
    a = coeffs.a[: coeffs.support]
    if h >= a.size:
        return 0.0
    return innov.sigma2 * _fsum(a[: a.size - h] * a[h:])


def third_moment_from_deltas(coeffs: MACoefficients, n: int, innov: InnovationSpec) -> float:
    """E[S_n^3] assembled from third-order covariances.

        E S_n^3 = n Delta(0) + 3 sum_h (n - h) Delta(h)
                  + 6 sum_{h, h'} (n - h - h') Delta(h, h')

    over h, h' >= 1 with h + h' < n.  Costs O(n^2 * support); meant as a
    cross-check of :func:`exact_moments_oracle` for short-memory weights.
    """
    L = coeffs.support
    terms = [n * delta_theoretical(coeffs, 0, None, innov)]
    for h in range(1, min(n, L)):
        terms.append(3 * (n - h) * delta_theoretical(coeffs, h, None, innov))
        for hp in range(1, min(n - h, L - h)):
            terms.append(6 * (n - h - hp) * delta_theoretical(coeffs, h, hp, innov))
    return math.fsum(terms)
