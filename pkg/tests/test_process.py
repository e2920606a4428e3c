import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpskew.process import (
    InnovationSpec,
    LinearProcessSpec,
    MACoefficients,
    ModelError,
    ar_roots,
    choose_truncation,
    coefficient_sum_m,
    expand_ma,
    farima_c,
    fractional_weights,
)


def test_farima_recursion_small():
    a = expand_ma(LinearProcessSpec(d=0.3), 2).a
    np.testing.assert_allclose(a, [1.0, 0.3, 0.3 * 1.3 / 2], rtol=1e-15)


def test_arma_recursion_small(arma11):
    a = expand_ma(arma11, 2).a
    np.testing.assert_allclose(a, [1.0, 1.0, 0.5], rtol=1e-15)


def test_arma_weights_sum_to_theta_over_phi(arma11):
    co = expand_ma(arma11, 200)
    assert math.fsum(co.a.tolist()) == pytest.approx(3.0, rel=1e-13)


def test_noncausal_ar_rejected():
    with pytest.raises(ModelError):
        LinearProcessSpec(ar=(1.0,))
    with pytest.raises(ModelError):
        LinearProcessSpec(ar=(1.5,))
    with pytest.raises(ModelError):
        LinearProcessSpec(ar=(0.5, 0.5))  # root at z = 1


def test_d_outside_range_rejected():
    for d in (-0.1, 0.5, 0.7):
        with pytest.raises(ModelError):
            LinearProcessSpec(d=d)


def test_truncation_below_order_rejected():
    spec = LinearProcessSpec(ar=(0.2, 0.1), ma=(0.3, 0.1, 0.1))
    with pytest.raises(ValueError):
        expand_ma(spec, 2)


def test_ar_roots_are_polynomial_roots():
    roots = ar_roots([0.5, -0.06])
    for z in roots:
        assert abs(1 - 0.5 * z + 0.06 * z * z) < 1e-12


@pytest.mark.parametrize("d", [0.1, 0.2, 0.4])
def test_farima_recursion_matches_gamma_ratio(d):
    a = fractional_weights(d, 50)
    mpmath.mp.dps = 40
    for i in range(51):
        exact = mpmath.gamma(i + d) / (mpmath.gamma(d) * mpmath.gamma(i + 1))
        assert abs(float(a[i] / exact) - 1) < 1e-12


@pytest.mark.parametrize("d", [0.1, 0.2, 0.4])
def test_long_memory_weights_asymptotics(d):
    spec = LinearProcessSpec(d=d)
    i = 10**5
    a = expand_ma(spec, i).a
    assert abs(a[i] * i ** (1 - d) / farima_c(spec) - 1) < 0.01


@settings(max_examples=40, deadline=None)
@given(
    phi=st.floats(-0.9, 0.9),
    th=st.lists(st.floats(-2, 2), min_size=0, max_size=3),
    d=st.sampled_from([0.0, 0.15, 0.35]),
)
def test_generating_function_identity(phi, th, d):
    # phi(B) a = theta(B) w coefficient-wise, w the fractional weights
    spec = LinearProcessSpec(ar=(phi,), ma=tuple(th), d=d)
    M = 60
    a = expand_ma(spec, M).a
    w = fractional_weights(d, M)
    lhs = a.copy()
    lhs[1:] -= phi * a[:-1]
    theta = np.array([1.0, *th])
    rhs = np.convolve(theta, w)[: M + 1]
    scale = max(1.0, np.abs(a).max())
    np.testing.assert_allclose(lhs[: M - 1], rhs[: M - 1], atol=1e-12 * scale)


def test_arma_weights_decay_geometrically():
    spec = LinearProcessSpec(ar=(0.7, -0.2), ma=(0.4,))
    a = expand_ma(spec, 80).a
    rho = 1 / np.abs(ar_roots(spec.ar)).min()
    j = np.arange(a.size)
    # envelope C * (j + 1) * rho^j covers repeated roots too
    assert np.all(np.abs(a) <= 10 * (j + 1) * rho**j)


def test_m_arma(arma11):
    assert coefficient_sum_m(arma11) == pytest.approx(3.0, rel=1e-15)


def test_m_farima():
    assert coefficient_sum_m(LinearProcessSpec(d=0.4)) == pytest.approx(
        1 / (0.4 * math.gamma(0.4)), rel=1e-13)


def test_m_continuous_at_zero():
    base = dict(ar=(0.3,), ma=(0.6,))
    m0 = coefficient_sum_m(LinearProcessSpec(**base))
    for d in (1e-4, 1e-7):
        assert coefficient_sum_m(LinearProcessSpec(d=d, **base)) == pytest.approx(m0, rel=1e-3)


def test_m_matches_coefficient_sum_for_arma():
    spec = LinearProcessSpec(ar=(0.6, -0.3), ma=(0.2, 0.1))
    co = expand_ma(spec, 400)
    assert coefficient_sum_m(spec) == pytest.approx(math.fsum(co.a.tolist()), rel=1e-12)


def test_truncation_white_noise_is_zero():
    assert choose_truncation(LinearProcessSpec(), 100) == 0


def test_truncation_pure_ma_is_order():
    assert choose_truncation(LinearProcessSpec(ma=(0.4, 0.3)), 100, tol=1e-12) == 2


@pytest.mark.parametrize("tol", [1e-4, 1e-10])
def test_truncation_arma_matches_direct_summation(arma11, tol):
    M = choose_truncation(arma11, 500, tol)
    # oracle: squared weights of a long expansion, summed directly
    sq = expand_ma(arma11, 400).a ** 2

    def ok(m):
        return math.fsum(sq[m + 1:].tolist()) <= tol * math.fsum(sq[: m + 1].tolist())

    assert ok(M)
    assert not ok(M - 1)


@pytest.mark.parametrize("d", [0.2, 0.4])
def test_long_memory_tail_bound_matches_partial_sums(d):
    spec = LinearProcessSpec(d=d)
    c = farima_c(spec)
    lo, hi = 1000, 10**6
    a = fractional_weights(d, hi)
    brute = math.fsum((a[lo + 1:] ** 2).tolist())
    closed = c * c * (lo ** (2 * d - 1) - hi ** (2 * d - 1)) / (1 - 2 * d)
    assert brute == pytest.approx(closed, rel=0.01)


def test_long_memory_truncation_certificate():
    d, tol = 0.2, 1e-4
    spec = LinearProcessSpec(d=d)
    M = choose_truncation(spec, 1000, tol)
    c = farima_c(spec)
    big = 4 * 10**6
    a = fractional_weights(d, big)
    sq = a * a

    def tail(m):
        # brute force up to `big`, closed form beyond it
        return math.fsum(sq[m + 1:].tolist()) + c * c * big ** (2 * d - 1) / (1 - 2 * d)

    head = math.fsum(sq[: M + 1].tolist())
    assert tail(M) <= tol * head * 1.02
    assert tail(int(M * 0.9)) > tol * head


def test_long_memory_truncation_capped_when_astronomical():
    M = choose_truncation(LinearProcessSpec(d=0.4), 1000, 1e-6)
    assert M == 2**62


def test_truncation_argument_checks():
    with pytest.raises(ValueError):
        choose_truncation(LinearProcessSpec(), 0)
    with pytest.raises(ValueError):
        choose_truncation(LinearProcessSpec(), 10, tol=0)


def test_coefficients_length_and_metadata():
    co = expand_ma(LinearProcessSpec(d=0.3, ar=(0.2,)), 100)
    assert co.a.size == co.truncation_M + 1 == 101
    assert co.d == 0.3
    assert co.c == pytest.approx(1.0 / (0.8 * math.gamma(0.3)))
    assert co.tail_estimate > 0
    with pytest.raises(ValueError):
        MACoefficients(np.ones(3), 5)


def test_innovation_invariants():
    e = InnovationSpec.exponential(2.0)
    assert e.sigma2 == pytest.approx(0.25) and e.eta == pytest.approx(0.25)
    assert InnovationSpec.gaussian(2.0).eta == 0
    with pytest.raises(ModelError):
        InnovationSpec("gaussian", 1.0, 0.5)
    with pytest.raises(ModelError):
        InnovationSpec.gaussian(0.0)
    with pytest.raises(ModelError):
        InnovationSpec("exponential", 1.0, 1.0, rate=1.0)


@pytest.mark.parametrize("text,expected", [
    ("exp:1", InnovationSpec.exponential(1.0)),
    ("exp:0.5", InnovationSpec.exponential(0.5)),
    ("gaussian:2", InnovationSpec.gaussian(2.0)),
    ("custom:1,2,9,265", InnovationSpec.custom(1, 2, 9, 265)),
])
def test_innovation_parse(text, expected):
    assert InnovationSpec.parse(text) == expected


def test_innovation_parse_rejects_garbage():
    for text in ("cauchy:1", "exp:x", "custom:1,2"):
        with pytest.raises(ModelError):
            InnovationSpec.parse(text)


def test_spec_json_round_trip():
    spec = LinearProcessSpec(mu=1.5, ar=(0.3,), ma=(0.2, -0.1), d=0.25,
                             innovation=InnovationSpec.custom(2.0, 1.0, 12.0, 100.0))
    doc = spec.to_dict()
    assert set(doc) == {"schema_version", "mu", "ar", "ma", "d", "innovation"}
    assert doc["innovation"] == {"law": "custom",
                                 "params": {"sigma2": 2.0, "eta": 1.0, "m4": 12.0, "m6": 100.0}}
    back = LinearProcessSpec.from_json(spec.to_json())
    assert back == spec
    assert back.fingerprint() == spec.fingerprint()
    assert LinearProcessSpec(d=0.1).fingerprint() != spec.fingerprint()


def test_spec_json_rejects_unknown_keys():
    with pytest.raises(ModelError):
        LinearProcessSpec.from_dict({"d": 0.1, "phi": [0.3]})
    with pytest.raises(ModelError):
        LinearProcessSpec.from_dict({"schema_version": 99})
    with pytest.raises(ModelError):
        LinearProcessSpec.from_json("{not json")
