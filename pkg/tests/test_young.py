import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import conjugate_by_maximisation, dense_ellipticity, root_mp
from fglap.errors import DomainError, RejectedParameterError
from fglap.young import (
    check_inequality_suite,
    conjugate,
    conjugate_sweep,
    estimate_ellipticity,
    from_derivative,
    g_inverse,
    lema0bis_constant,
    lema0bis_constant_naive,
    make_power,
    make_power_sum,
    rescale,
    young_from_config,
)

exponents = st.floats(min_value=2.05, max_value=6.0)
positive_t = st.floats(min_value=1e-4, max_value=1e4)


def test_power_three_closed_forms():
    yf = make_power(3)
    t = np.geomspace(1e-3, 1e3, 101)
    assert np.allclose(yf.g(t), t**2, rtol=1e-15)
    assert (yf.lam, yf.Lam) == (2.0, 2.0)
    assert np.allclose(t * yf.g(t) / yf.G(t), 3.0, rtol=1e-14)


def test_power_three_doubling_equality_at_one():
    yf = make_power(3)
    assert yf.g(2.0) == 4.0 == 2.0**yf.Lam * yf.g(1.0)


def test_power_ratio_constant():
    yf = make_power(2.5)
    t = 1.7
    assert t * yf.g_prime(t) / yf.g(t) == pytest.approx(1.5, rel=1e-15)


@pytest.mark.parametrize("p", [2.0, 1.5, -3.0])
def test_power_rejects_p_at_most_two(p):
    with pytest.raises(RejectedParameterError):
        make_power(p)


def test_power_two_allowed_only_outside_hypotheses():
    yf = make_power(2.0, outside_hypotheses=True)
    assert yf.outside_hypotheses and yf.lam == 1.0


def test_power_sum_ellipticity_matches_dense_sampling():
    yf = make_power_sum(3, 4)
    lo, hi = dense_ellipticity(yf.g, yf.g_prime)
    assert (yf.lam, yf.Lam) == (2.0, 3.0)
    assert lo == pytest.approx(2.0, abs=1e-5)
    assert hi == pytest.approx(3.0, abs=1e-5)


def test_power_sum_degenerate_reduces_to_power():
    a, b = make_power_sum(3, 5, a=1, b=0), make_power(3)
    t = np.geomspace(1e-3, 1e3, 50)
    assert np.array_equal(a.g(t), b.g(t))
    assert (a.lam, a.Lam) == (b.lam, b.Lam)


def test_power_sum_equal_exponents():
    yf = make_power_sum(3, 3, a=0.3, b=7.0)
    assert (yf.lam, yf.Lam) == (2.0, 2.0)
    assert estimate_ellipticity(yf) == pytest.approx((2.0, 2.0), abs=1e-12)


def test_power_sum_rejects_negative_coefficients():
    with pytest.raises(RejectedParameterError):
        make_power_sum(3, 4, a=-1)


def test_estimate_ellipticity_power():
    assert estimate_ellipticity(make_power(3)) == pytest.approx((2.0, 2.0), abs=1e-13)
    lo, hi = estimate_ellipticity(make_power_sum(3, 4))
    assert lo == pytest.approx(2.0, abs=1e-5) and hi == pytest.approx(3.0, abs=1e-5)


def test_estimate_ellipticity_rejects_degenerate_range():
    with pytest.raises(DomainError):
        estimate_ellipticity(make_power(3), t_min=1.0, t_max=1.0)


def test_g_inverse_examples():
    assert g_inverse(make_power(3), 4.0) == pytest.approx(2.0, rel=1e-15)
    assert g_inverse(make_power(3), 0.0) == 0.0
    ps = make_power_sum(3, 4)
    ref = root_mp(lambda t: t**2 + t**3 - 2, 0.5, 1.5)
    assert g_inverse(ps, 2.0) == pytest.approx(ref, rel=1e-14)


def test_g_inverse_rejects_negative():
    with pytest.raises(DomainError):
        g_inverse(make_power(3), -1.0)


def test_conjugate_examples():
    yf = make_power(3)
    assert conjugate(yf, 1.0) == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert conjugate(yf, 0.0) == 0.0
    w = np.geomspace(1e-2, 1e2, 25)
    assert np.allclose(conjugate(yf, w), (2.0 / 3.0) * w**1.5, rtol=1e-12)


@pytest.mark.parametrize("w", [0.01, 0.3, 1.0, 7.0, 40.0])
def test_conjugate_matches_direct_maximisation(w):
    yf = make_power_sum(3, 4)
    ref = conjugate_by_maximisation(lambda t: float(yf.G(t)), w)
    assert conjugate(yf, w) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_conjugate_sweep_young_inequality():
    t = np.geomspace(1e-3, 1e3, 200)
    viol, gap = conjugate_sweep(make_power_sum(3, 4), t, t)
    assert viol <= 1e-8 and gap < 1e-8


def test_lema0_arithmetic_example():
    g = make_power(3).g
    a, b = 2.0, 1.0
    lhs = g(a - b) - g(a)
    rhs = -(2.0 ** (1 - 2)) * g(b)
    assert (lhs, rhs) == (-3.0, -0.5)
    assert rhs - lhs == 2.5


def test_delta2_inversa_arithmetic_example():
    yf = make_power(3)
    assert g_inverse(yf, 8.0) == pytest.approx(2 * math.sqrt(2), rel=1e-14)
    assert g_inverse(yf, 8.0) <= 2**0.5 * (g_inverse(yf, 4.0) + g_inverse(yf, 4.0))


@pytest.mark.parametrize("yf", [make_power(2.5), make_power(3), make_power(4), make_power_sum(3, 4)],
                         ids=lambda y: y.name)
def test_inequality_suite_passes(yf):
    rep = check_inequality_suite(yf, n_samples=100_000, seed=1)
    assert rep.passed, rep.failures()


def test_inequality_suite_report_is_json_and_seeded():
    a = check_inequality_suite(make_power(3), n_samples=2000, seed=7).to_json()
    b = check_inequality_suite(make_power(3), n_samples=2000, seed=7).to_json()
    assert a == b
    doc = json.loads(a)
    assert {"name", "samples", "max_violation", "pass"} <= set(doc["records"][0])


def test_inequality_suite_flags_non_convex_g():
    # t^2 on [0,1] continued by t^1.5: increasing but concave beyond 1
    g = lambda t: np.where(t <= 1, t**2, t**1.5)  # noqa: E731
    gp = lambda t: np.where(t <= 1, 2 * t, 1.5 * t**0.5)  # noqa: E731
    yf = from_derivative(g, gp, 2.0, 2.0, name="bent")
    rep = check_inequality_suite(yf, n_samples=2000, seed=0)
    failed = set(rep.failures())
    assert "g4_convexity" in failed and "lieberman_L" in failed


def test_lema0bis_corrected_constant_holds_where_naive_fails():
    # a = -M, b ~ 1 with M large: the difference quotient sees g' beyond M
    yf = make_power(4)
    M = 10.0
    a, b = np.meshgrid(np.linspace(-M, M, 401), np.geomspace(1e-3, 100, 401), indexing="ij")
    lhs = yf.g(a) - yf.g(a - b)
    bound = np.maximum(b, yf.g(b))
    assert np.all(lhs <= lema0bis_constant(yf, M) * bound * (1 + 1e-12))
    assert np.any(lhs > lema0bis_constant_naive(yf, M) * bound)


def test_young_from_config_roundtrip():
    yf = young_from_config({"family": "power_sum", "params": {"p": 3, "q": 4}})
    assert young_from_config(yf.describe()).name == yf.name


def test_young_from_config_rejects_unknown_family():
    with pytest.raises(RejectedParameterError):
        young_from_config({"family": "nope", "params": {}})


def test_rescale_preserves_ellipticity():
    yf = make_power_sum(3, 4)
    r = rescale(yf, 2.0, 0.5)
    assert (r.lam, r.Lam) == (yf.lam, yf.Lam)
    # the same samples of t g'/g, seen through t -> R^s t
    c = 2.0**0.5
    assert estimate_ellipticity(r, 1e-6 * c, 1e6 * c) == pytest.approx(estimate_ellipticity(yf), abs=1e-8)
    t = np.geomspace(1e-2, 1e2, 20)
    assert np.allclose(r.g(t), yf.g(2.0**-0.5 * t), rtol=1e-14)


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=60, deadline=None)
@given(p=exponents, t=positive_t)
def test_power_ratios_exact(p, t):
    yf = make_power(p)
    assert t * yf.g_prime(t) / yf.g(t) == pytest.approx(p - 1, rel=1e-12)
    assert t * yf.g(t) / yf.G(t) == pytest.approx(p, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(p=exponents, q=exponents, a=st.floats(0.01, 10), b=st.floats(0.01, 10), t=positive_t)
def test_odd_extension(p, q, a, b, t):
    yf = make_power_sum(p, q, a, b)
    assert yf.g(-t) == -yf.g(t)
    assert yf.G(-t) == yf.G(t)


@settings(max_examples=60, deadline=None)
@given(p=exponents, q=exponents, t=st.floats(1e-3, 1e3))
def test_g_inverse_of_g(p, q, t):
    yf = make_power_sum(p, q)
    assert g_inverse(yf, float(yf.g(t))) == pytest.approx(t, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(p=exponents, t=st.floats(1e-3, 1e3), w=st.floats(1e-3, 1e3))
def test_young_inequality_pointwise(p, t, w):
    yf = make_power(p)
    assert t * w <= yf.G(t) + conjugate(yf, w) + 1e-10 * max(1.0, t * w)


@settings(max_examples=15, deadline=None)
@given(p=exponents, q=exponents, a=st.floats(0.05, 20), b=st.floats(0.05, 20), seed=st.integers(0, 2**16))
def test_inequality_suite_holds_for_valid_families(p, q, a, b, seed):
    rep = check_inequality_suite(make_power_sum(p, q, a, b), n_samples=5000, seed=seed)
    assert rep.passed, [(n, rep[n].max_violation) for n in rep.failures()]
