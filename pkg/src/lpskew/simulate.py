"""Reproducible sample paths of linear processes."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .process import InnovationSpec, LinearProcessSpec, MACoefficients, choose_truncation, expand_ma

# the generator is part of the reproducibility contract; bump on change
GENERATOR = "numpy.PCG64/v1"
# direct convolution up to this many multiply-adds, FFT beyond
DIRECT_CONVOLUTION_LIMIT = 2**22
# tail fraction sum_{i>M} a_i^2 / sum a_i^2 above which a warning is issued
TRUNCATION_WARN_FRACTION = 0.1


class TruncationWarning(UserWarning):
    """The MA truncation drops a noticeable part of the process variance."""


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Observations X_1..X_n with their provenance.

    ``spec_fingerprint`` and ``seed`` are None for ingested data.
    """

    x: np.ndarray
    spec_fingerprint: Optional[str] = None
    seed: Optional[int] = None
    truncation_M: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise ValueError("a sample path needs at least one observation")
        if not np.all(np.isfinite(x)):
            raise ValueError("sample path contains non-finite values")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.size

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.x)


def innovation_moments(spec: InnovationSpec) -> tuple[float, float, float, float]:
    """Central moments (sigma2, eta, m4, m6) of the centered innovation law."""
    if spec.law == "gaussian":
        s2 = spec.sigma2
        return s2, 0.0, 3 * s2**2, 15 * s2**3
    if spec.law == "exponential":
        # E(E - 1)^k for E ~ Exp(1), then rescaled by rate^-k
        s = 1.0 / spec.rate
        return s**2, 2 * s**3, 9 * s**4, 265 * s**6
    return spec.sigma2, spec.eta, spec.m4, spec.m6


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def replication_seed(base_seed: int, *keys: int) -> int:
    """64-bit seed for one Monte Carlo stream, hashed from the base seed and keys."""
    ss = np.random.SeedSequence([int(base_seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


def draw_innovations(spec: InnovationSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """Centered i.i.d. innovations.

    Custom laws are drawn from a shifted, scaled gamma distribution that
    matches sigma2 and eta (Gaussian when eta = 0); m4 and m6 are not matched.
    """
    if spec.law == "gaussian":
        return spec.sigma * rng.standard_normal(size)
    if spec.law == "exponential":
        scale = 1.0 / spec.rate
        return rng.exponential(scale, size) - scale
    if spec.eta == 0:
        return spec.sigma * rng.standard_normal(size)
    skew = spec.eta / spec.sigma**3
    shape = 4.0 / skew**2
    z = (rng.standard_gamma(shape, size) - shape) / math.sqrt(shape)
    return math.copysign(1.0, skew) * spec.sigma * z


def convolve_valid(eps: np.ndarray, a: np.ndarray, method: str = "auto") -> np.ndarray:
    """x_t = sum_i a_i eps_{t-i} for every t with a full window.

    ``method`` is "direct", "fft" or "auto" (direct when the work is small).
    """
    n = eps.size - a.size + 1
    if n < 1:
        raise ValueError("not enough innovations for the requested window")
    if method == "auto":
        method = "direct" if n * a.size <= DIRECT_CONVOLUTION_LIMIT else "fft"
    if method == "direct":
        return np.convolve(eps, a, mode="valid")
    if method == "fft":
        return fftconvolve(eps, a, mode="valid")
    raise ValueError(f"unknown convolution method {method!r}")


def default_truncation(spec: LinearProcessSpec, n: int) -> int:
    """max(10 n, 10^4) for long memory; the geometric tail certificate otherwise."""
    if spec.d > 0:
        return max(10 * n, 10**4)
    return choose_truncation(spec, n)


def simulate_path(spec: LinearProcessSpec, n: int, seed: int, M: Optional[int] = None,
                  coeffs: Optional[MACoefficients] = None, method: str = "auto") -> SamplePath:
    """Simulate X_1..X_n from ``spec``.

    Draws M + n innovations from a PCG64 stream seeded with ``seed`` and
    applies the truncated MA filter.  Identical arguments give a
    bit-identical path.

    Parameters
    ----------
    spec : LinearProcessSpec
    n : int
        Path length.
    seed : int
        64-bit seed.
    M : int, optional
        MA truncation; defaults to :func:`default_truncation`.
    coeffs : MACoefficients, optional
        Precomputed ``expand_ma(spec, M)``, to skip the expansion in loops.
    method : str
        Convolution strategy, see :func:`convolve_valid`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    default_used = M is None and coeffs is None
    if coeffs is None:
        M = default_truncation(spec, n) if M is None else int(M)
        if M < 0:
            raise ValueError("M must be >= 0")
        coeffs = expand_ma(spec, M)
    M = coeffs.truncation_M

    total = coeffs.sum_squares + coeffs.tail_estimate
    if total > 0 and coeffs.tail_estimate / total > TRUNCATION_WARN_FRACTION:
        warnings.warn(f"MA truncation M={M} drops about "
                      f"{coeffs.tail_estimate / total:.1%} of the process variance",
                      TruncationWarning, stacklevel=2)

    rng = make_rng(seed)
    eps = draw_innovations(spec.innovation, M + n, rng)
    x = convolve_valid(eps, coeffs.a, method)
    if spec.mu:
        x = x + spec.mu
    meta = {"generator": GENERATOR, "truncation_default": default_used}
    return SamplePath(x, spec_fingerprint=spec.fingerprint(), seed=int(seed),
                      truncation_M=M, meta=meta)
