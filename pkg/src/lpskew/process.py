"""Linear process models and their truncated MA(infinity) expansions.

A FARIMA(p, d, q) model

    phi(B) (1 - B)^d (X_t - mu) = theta(B) eps_t

with phi(z) = 1 - phi_1 z - ... - phi_p z^p and theta(z) = 1 + theta_1 z + ...
+ theta_q z^q is expanded into X_t = mu + sum_i a_i eps_{t-i}.  For d = 0 this
is a plain ARMA model.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma, gammaln

SCHEMA_VERSION = 1

# causality margin on AR roots
ROOT_MARGIN = 1e-9
# ARMA impulse responses are cut once they fall below this fraction of their peak
IMPULSE_CUTOFF = 1e-16
# upper bound on the length of an ARMA impulse response
MAX_IMPULSE_LENGTH = 10_000_000
# returned when the closed-form long-memory certificate overflows
MAX_TRUNCATION = 2**62


class ModelError(ValueError):
    """Raised for invalid or unsupported process models."""


@dataclass(frozen=True)
class InnovationSpec:
    """Law of the i.i.d. innovations, always centered to mean zero.

    Use the :meth:`gaussian`, :meth:`exponential` and :meth:`custom`
    constructors rather than calling the class directly.
    """

    law: str
    sigma2: float
    eta: float
    rate: Optional[float] = None
    m4: Optional[float] = None
    m6: Optional[float] = None

    LAWS = ("gaussian", "exponential", "custom")

    def __post_init__(self):
        if self.law not in self.LAWS:
            raise ModelError(f"unknown innovation law {self.law!r}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ModelError("innovation variance must be positive and finite")
        if self.law == "gaussian" and self.eta != 0:
            raise ModelError("gaussian innovations have eta = 0")
        if self.law == "exponential":
            if self.rate is None or not self.rate > 0:
                raise ModelError("exponential innovations need a positive rate")
            if not (math.isclose(self.sigma2, self.rate**-2, rel_tol=1e-12)
                    and math.isclose(self.eta, 2 * self.rate**-3, rel_tol=1e-12)):
                raise ModelError("exponential moments inconsistent with rate")
        if self.law == "custom" and (self.m4 is None or self.m6 is None):
            raise ModelError("custom innovations need m4 and m6")

    @classmethod
    def gaussian(cls, sigma2: float = 1.0) -> "InnovationSpec":
        return cls("gaussian", float(sigma2), 0.0)

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "InnovationSpec":
        """Exponential(rate) shifted by its mean 1/rate."""
        rate = float(rate)
        return cls("exponential", rate**-2, 2 * rate**-3, rate=rate)

    @classmethod
    def custom(cls, sigma2: float, eta: float, m4: float, m6: float) -> "InnovationSpec":
        return cls("custom", float(sigma2), float(eta), m4=float(m4), m6=float(m6))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def params(self) -> dict:
        if self.law == "gaussian":
            return {"sigma2": self.sigma2}
        if self.law == "exponential":
            return {"rate": self.rate}
        return {"sigma2": self.sigma2, "eta": self.eta, "m4": self.m4, "m6": self.m6}

    def to_dict(self) -> dict:
        return {"law": self.law, "params": self.params()}

    @classmethod
    def from_dict(cls, doc: dict) -> "InnovationSpec":
        law = doc.get("law")
        params = doc.get("params", {})
        try:
            if law == "gaussian":
                return cls.gaussian(**params)
            if law == "exponential":
                return cls.exponential(**params)
            if law == "custom":
                return cls.custom(**params)
        except TypeError as exc:
            raise ModelError(f"bad parameters for {law!r} innovations: {exc}") from None
        raise ModelError(f"unknown innovation law {law!r}")

    @classmethod
    def parse(cls, text: str) -> "InnovationSpec":
        """Parse the compact CLI form: ``exp:RATE``, ``gaussian:SIGMA2`` or
        ``custom:SIGMA2,ETA,M4,M6``."""
        law, _, rest = text.partition(":")
        law = law.strip().lower()
        try:
            values = [float(v) for v in rest.split(",")] if rest else []
        except ValueError:
            raise ModelError(f"cannot parse innovation {text!r}") from None
        if law in ("exp", "exponential"):
            return cls.exponential(*(values or [1.0]))
        if law in ("gauss", "gaussian", "normal"):
            return cls.gaussian(*(values or [1.0]))
        if law == "custom" and len(values) == 4:
            return cls.custom(*values)
        raise ModelError(f"cannot parse innovation {text!r}")


@dataclass(frozen=True)
class LinearProcessSpec:
    """FARIMA(p, d, q) model with mean ``mu``.

    ``ar`` holds phi_1..phi_p and ``ma`` holds theta_1..theta_q, with the sign
    conventions phi(z) = 1 - sum phi_k z^k and theta(z) = 1 + sum theta_k z^k.
    """

    mu: float = 0.0
    ar: tuple = ()
    ma: tuple = ()
    d: float = 0.0
    innovation: InnovationSpec = field(default_factory=InnovationSpec.gaussian)

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "mu", float(self.mu))
        if not 0.0 <= self.d < 0.5:
            raise ModelError(f"memory parameter d={self.d} outside [0, 0.5)")
        if not all(math.isfinite(v) for v in (*self.ar, *self.ma, self.mu)):
            raise ModelError("model coefficients must be finite")
        roots = ar_roots(self.ar)
        if roots.size and np.min(np.abs(roots)) <= 1 + ROOT_MARGIN:
            raise ModelError("AR polynomial has a root in the closed unit disk; "
                             "the model is not causal")

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)

    @property
    def phi_at_one(self) -> float:
        return 1.0 - math.fsum(self.ar)

    @property
    def theta_at_one(self) -> float:
        return 1.0 + math.fsum(self.ma)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mu": self.mu,
            "ar": list(self.ar),
            "ma": list(self.ma),
            "d": self.d,
            "innovation": self.innovation.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearProcessSpec":
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ModelError(f"unsupported process schema_version {version}")
        unknown = set(doc) - {"schema_version", "mu", "ar", "ma", "d", "innovation"}
        if unknown:
            raise ModelError(f"unknown process spec keys: {sorted(unknown)}")
        innovation = doc.get("innovation")
        return cls(
            mu=doc.get("mu", 0.0),
            ar=doc.get("ar", ()),
            ma=doc.get("ma", ()),
            d=doc.get("d", 0.0),
            innovation=(InnovationSpec.from_dict(innovation)
                        if innovation is not None else InnovationSpec.gaussian()),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LinearProcessSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"process spec is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def fingerprint(self) -> str:
        """Stable hex digest of the canonical JSON form."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class MACoefficients:
    """Truncated moving-average weights a_0..a_M.

    ``c`` is the long-memory constant in a_i ~ c i^(d-1).  It is filled in by
    :func:`expand_ma` for FARIMA models; for hand-built long-memory weights
    it has to be supplied by the caller.
    """

    a: np.ndarray
    truncation_M: int
    d: float = 0.0
    tail_estimate: float = 0.0
    c: Optional[float] = None

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        if a.ndim != 1 or a.size != self.truncation_M + 1:
            raise ValueError("len(a) must equal truncation_M + 1")

    @classmethod
    def from_weights(cls, a: Sequence[float], d: float = 0.0,
                     c: Optional[float] = None) -> "MACoefficients":
        a = np.asarray(a, dtype=float)
        return cls(a, a.size - 1, d=d, tail_estimate=0.0, c=c)

    @cached_property
    def support(self) -> int:
        """Index one past the last nonzero weight."""
        nz = np.flatnonzero(self.a)
        return int(nz[-1]) + 1 if nz.size else 0

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Partial sums A(N) = a_0 + ... + a_N."""
        return np.cumsum(self.a)

    @property
    def sum_squares(self) -> float:
        return math.fsum((self.a * self.a).tolist())


def ar_roots(ar: Sequence[float]) -> np.ndarray:
    """Roots of phi(z) = 1 - phi_1 z - ... - phi_p z^p (companion eigenvalues)."""
    coefs = np.array([1.0, *(-v for v in ar)])
    coefs = np.trim_zeros(coefs, "b")
    if coefs.size <= 1:
        return np.empty(0, dtype=complex)
    return np.roots(coefs[::-1])


def fractional_weights(d: float, M: int) -> np.ndarray:
    """Weights of (1 - B)^(-d): w_0 = 1, w_i = w_{i-1} (i - 1 + d) / i."""
    if d == 0:
        w = np.zeros(M + 1)
        w[0] = 1.0
        return w
    i = np.arange(1, M + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((i - 1 + d) / i)))


def arma_impulse_response(ar: Sequence[float], ma: Sequence[float],
                          max_len: int) -> np.ndarray:
    """Coefficients of theta(z)/phi(z), cut where they become negligible.

    Uses psi_j = theta_j + sum_k phi_k psi_{j-k}.  The returned array has at
    most ``max_len`` entries and ends once ``max(p, 1)`` consecutive values
    are below ``IMPULSE_CUTOFF`` times the largest magnitude seen.
    """
    p, q = len(ar), len(ma)
    theta = [1.0, *ma]
    if p == 0:
        return np.array(theta[:max_len], dtype=float)
    psi = []
    peak = 0.0
    quiet = 0
    for j in range(max_len):
        v = theta[j] if j <= q else 0.0
        for k in range(1, min(j, p) + 1):
            v += ar[k - 1] * psi[j - k]
        psi.append(v)
        peak = max(peak, abs(v))
        if j >= q and abs(v) < IMPULSE_CUTOFF * peak:
            quiet += 1
            if quiet >= p:
                break
        else:
            quiet = 0
    return np.array(psi, dtype=float)


def farima_c(spec: LinearProcessSpec) -> Optional[float]:
    """c(d) = theta(1) / (phi(1) Gamma(d)) for d > 0, else None."""
    if spec.d == 0:
        return None
    return spec.theta_at_one / (spec.phi_at_one * gamma(spec.d))


def _long_memory_tail(c: float, d: float, M: int) -> float:
    # sum_{i>M} a_i^2 ~ c^2 M^(2d-1) / (1 - 2d)
    return c * c * max(M, 1) ** (2 * d - 1) / (1 - 2 * d)


def expand_ma(spec: LinearProcessSpec, M: int) -> MACoefficients:
    """Expand a FARIMA model into its first M + 1 moving-average weights.

    The fractional weights of (1 - B)^(-d) come from the exact integer
    recursion and are then filtered by the ARMA impulse response, so that
    phi(B) a = theta(B) w holds coefficient-wise up to index M.

    Parameters
    ----------
    spec : LinearProcessSpec
        A validated (causal) model.
    M : int
        Truncation lag; must be at least ``max(p, q)``.

    Returns
    -------
    MACoefficients
    """
    M = int(M)
    if M < max(spec.p, spec.q, 0):
        raise ValueError(f"truncation M={M} is below max(p, q)={max(spec.p, spec.q)}")
    psi = arma_impulse_response(spec.ar, spec.ma, M + 1)
    if spec.d == 0:
        a = np.zeros(M + 1)
        a[: psi.size] = psi
        if psi.size == M + 1 and spec.p:
            # impulse response was cut by M rather than by magnitude
            extra = arma_impulse_response(spec.ar, spec.ma, MAX_IMPULSE_LENGTH)[M + 1:]
            tail = math.fsum((extra * extra).tolist())
        else:
            tail = 0.0
        return MACoefficients(a, M, d=0.0, tail_estimate=tail)

    w = fractional_weights(spec.d, M)
    if psi.size == 1:
        a = w
    else:
        a = np.convolve(psi, w)[: M + 1]
    c = farima_c(spec)
    return MACoefficients(a, M, d=spec.d, tail_estimate=_long_memory_tail(c, spec.d, M), c=c)


def coefficient_sum_m(spec: LinearProcessSpec) -> float:
    """m(d): sum of the weights for d = 0, c(d)/d for long memory.

    For FARIMA both cases reduce to theta(1) / (phi(1) Gamma(1 + d)), which
    is continuous as d -> 0.
    """
    phi1 = spec.phi_at_one
    if phi1 == 0:
        raise ModelError("phi(1) = 0: the model has a unit root")
    if spec.d == 0:
        return spec.theta_at_one / phi1
    return spec.theta_at_one / (phi1 * math.exp(gammaln(1 + spec.d)))


def choose_truncation(spec: LinearProcessSpec, n: int, tol: float = 1e-16) -> int:
    """Smallest M whose squared-weight tail is at most ``tol`` times the head.

    Short memory is handled by summing the ARMA impulse response directly.
    For long memory the closed-form bound c^2 M^(2d-1) / (1 - 2d) is used;
    it grows very quickly as d -> 1/2 and is capped at ``MAX_TRUNCATION``.
    ``n`` is the intended sample length and is only validated here.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    floor = max(spec.p, spec.q)
    if spec.d == 0:
        psi = arma_impulse_response(spec.ar, spec.ma, MAX_IMPULSE_LENGTH)
        sq = psi * psi
        head = np.cumsum(sq)
        # tail[M] = sum_{i > M} psi_i^2, accumulated from the far end
        tail = np.concatenate((np.cumsum(sq[::-1])[::-1][1:], [0.0]))
        ok = np.flatnonzero(tail <= tol * head)
        return max(int(ok[0]), floor)

    c = farima_c(spec)
    head = expand_ma(spec, max(1000, floor)).sum_squares
    exponent = 1 - 2 * spec.d
    log_m = (math.log(c * c) - math.log(exponent * tol * head)) / exponent
    if log_m > math.log(MAX_TRUNCATION):
        return MAX_TRUNCATION
    return max(math.ceil(math.exp(log_m)), floor)
