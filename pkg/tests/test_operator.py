import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import p_laplacian_1d
from fglap.errors import ConfigurationError, DomainError, HypothesisViolationError, InsufficientExteriorDataError
from fglap.lattice import AnalyticFunction, Exterior, LatticeFunction, gaussian_bump, lattice_from_function, power_profile
from fglap.operator import (
    QuadratureSpec,
    exterior_correction,
    extrapolate,
    lieberman_bound,
    pointwise_apply,
    profile_I1,
    profile_I1_numeric,
    profile_residual_bound,
    profile_truncated,
    s_holder_quotient,
    tail,
    weak_pairing,
)
from fglap.young import make_power, make_power_sum, rescale

M1 = 129
H1 = 2.0 / (M1 - 1)
XS = np.linspace(-1.0, 1.0, M1)


def lattice_1d(vals, exterior=None):
    return LatticeFunction(np.asarray(vals, dtype=float), (-1.0,), H1, exterior or Exterior.zero())


def smooth_bump(x, c, w):
    z = np.clip(1 - ((x - c) / w) ** 2, 1e-300, None)
    return np.where(np.abs(x - c) < w, np.exp(-1 / z), 0.0)


def test_quadrature_spec_default_schedule():
    q = QuadratureSpec()
    assert q.eps_schedule[0] == 2.0**-3 and q.eps == q.eps_schedule[-1] == 2.0**-10


def test_quadrature_spec_rejects_bad_schedule():
    with pytest.raises(ConfigurationError):
        QuadratureSpec(eps_schedule=(0.1, 0.2))


def test_extrapolate_recovers_planted_limit():
    eps = 2.0 ** -np.arange(3, 11)
    vals = 1.5 + 0.7 * eps**0.6
    limit, order, ok = extrapolate(eps, vals)
    assert ok and limit == pytest.approx(1.5, abs=1e-12) and order == pytest.approx(0.6, abs=1e-9)


def test_constant_function_gives_zero():
    c = AnalyticFunction(lambda p: np.full(len(p), 2.5), 1)
    r = pointwise_apply(make_power(3), c, [0.3], 0.5)
    assert r.value == 0.0 and r.extrapolated == 0.0


def test_profile_vanishes_at_one():
    r = pointwise_apply(make_power(3), power_profile(0.5), [1.0], 0.5)
    assert abs(r.extrapolated) <= 1e-3


def test_bump_at_zero_matches_fine_cutoff_oracle_and_bound():
    yf, s = make_power(3), 0.5
    b = gaussian_bump((0.0,), 0.3)
    r = pointwise_apply(yf, b, [0.0], s)
    oracle = p_laplacian_1d(lambda y: math.exp(-(y**2) / 0.18), 0.0, s, 3, 1e-6)
    assert r.extrapolated == pytest.approx(oracle, rel=1e-5)
    assert abs(r.extrapolated) <= lieberman_bound(yf, *b.norms, 1, s)


@pytest.mark.parametrize("p", [3.0, 4.0, 2.5])
@pytest.mark.parametrize("x", [0.0, 0.3, -0.5, 1.2])
def test_power_case_reduces_to_p_laplacian(p, x):
    s = 0.5
    r = pointwise_apply(make_power(p), gaussian_bump((0.1,), 0.3), [x], s)
    f = lambda y: math.exp(-((y - 0.1) ** 2) / 0.18)  # noqa: E731
    for eps, v in zip(r.eps[-3:], r.values[-3:]):
        assert v == pytest.approx(p_laplacian_1d(f, x, s, p, eps), rel=1e-8, abs=1e-8)


def test_lattice_evaluation_needs_point_in_box():
    u = lattice_1d(smooth_bump(XS, 0, 0.5))
    with pytest.raises(DomainError):
        pointwise_apply(make_power(3), u, [1.5], 0.5)


def test_bounded_exterior_rejects_points_near_the_box_edge():
    u = lattice_1d(np.ones(M1), Exterior.bounded(1.0))
    with pytest.raises(InsufficientExteriorDataError):
        pointwise_apply(make_power(3), u, [0.95], 0.5)


def test_weak_pairing_zero_u():
    phi = lattice_1d(smooth_bump(XS, 0.2, 0.3))
    assert weak_pairing(make_power(3), lattice_1d(np.zeros(M1)), phi, 0.5) == 0.0


def test_weak_pairing_hat_with_itself_positive():
    v = np.zeros(M1)
    v[M1 // 2] = 1.0
    hat = lattice_1d(v)
    assert weak_pairing(make_power(3), hat, hat, 0.5) > 0


def test_weak_pairing_matches_integrated_pointwise_values():
    m = 256
    h = 2.0 / (m - 1)
    xs = np.linspace(-1, 1, m)
    yf, s = make_power(3), 0.5
    u = LatticeFunction(smooth_bump(xs, 0.0, 0.6), (-1.0,), h, Exterior.zero())
    phi = LatticeFunction(smooth_bump(xs, 0.2, 0.4), (-1.0,), h, Exterior.zero())
    idx = np.flatnonzero(phi.values)
    pw = h * sum(pointwise_apply(yf, u, [xs[i]], s).extrapolated * phi.values[i] for i in idx)
    assert weak_pairing(yf, u, phi, s) == pytest.approx(pw, rel=0.01)


def test_weak_pairing_rejects_test_function_with_boundary_values():
    u = lattice_1d(smooth_bump(XS, 0, 0.5))
    with pytest.raises(Exception):
        weak_pairing(make_power(3), u, lattice_1d(np.ones(M1)), 0.5)


def test_holder_quotient_examples():
    lin = lattice_1d(XS)
    assert s_holder_quotient(lin, [1.0], [0.0], 0.5) == pytest.approx(1.0)
    const = lattice_1d(np.full(M1, 3.0))
    assert s_holder_quotient(const, [0.3], [-0.6], 0.4) == 0.0
    prof = power_profile(0.5)
    assert s_holder_quotient(prof, [2.0], [0.0], 0.5) == pytest.approx(1.0, rel=1e-15)


def test_tail_vanishes_when_u_lives_inside_the_ball():
    u = lattice_1d(smooth_bump(XS, 0.0, 0.3))
    assert tail(make_power(3), u, [0.0], 0.5, "g", 0.5) == 0.0


def test_tail_of_constant_p_plus_closed_form():
    s, M = 0.5, 2.0
    yf = make_power_sum(3, 4)
    u = lattice_1d(np.full(M1, M), Exterior.bounded(M))
    pp = yf.p_plus
    expected = (M ** (pp - 1) * 2 / (s * pp)) ** (1 / (pp - 1))
    assert tail(yf, u, [0.0], 1.0, "p_plus", s) == pytest.approx(expected, rel=1e-9)


def test_tail_is_continuous_in_R():
    u = lattice_1d(smooth_bump(XS, 0.2, 0.6))
    yf = make_power(3)
    Rs = np.linspace(0.2, 0.3, 11)
    vals = np.array([tail(yf, u, [0.0], R, "g", 0.5) for R in Rs])
    assert np.all(np.isfinite(vals)) and np.max(np.abs(np.diff(vals))) < 0.05 * np.max(vals)


def test_tail_modes_agree_for_power():
    u = lattice_1d(smooth_bump(XS, 0.2, 0.6))
    yf = make_power(3)
    vals = [tail(yf, u, [0.0], 0.25, m, 0.5) for m in ("g", "p_plus", "p_minus")]
    assert vals == pytest.approx([vals[0]] * 3, rel=1e-10)


def test_lieberman_bound_examples():
    yf = make_power(3)
    assert lieberman_bound(yf, 0, 0, 0, 1, 0.5) == 0.0
    assert lieberman_bound(yf, 1, 1, 1, 1, 0.5) == pytest.approx(24.0, rel=1e-15)


def test_profile_I1_examples():
    yf = make_power(3)
    assert profile_I1(yf, 0.5, 1.0) == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert profile_I1(yf, 0.5, 40.0) / profile_I1(yf, 0.5, 10.0) == pytest.approx(4**-0.5)
    ps = make_power_sum(3, 4)
    assert profile_I1_numeric(ps, 0.7, 2.0) == pytest.approx(profile_I1(ps, 0.7, 2.0), rel=1e-6)


def test_profile_I1_rejects_nonpositive_x():
    with pytest.raises(DomainError):
        profile_I1(make_power(3), 0.5, 0.0)


def test_profile_residual_bound_rate_and_monotonicity():
    yf, s = make_power(3), 0.5
    sched = QuadratureSpec().eps_schedule
    b = np.array([profile_residual_bound(yf, s, 1.0, e) for e in sched])
    assert np.all(np.diff(b) < 0)
    tiny = [profile_residual_bound(yf, s, 1.0, e) for e in (1e-8, 5e-9)]
    assert tiny[1] / tiny[0] == pytest.approx(2 ** -(1 - s), rel=1e-3)


def test_profile_residual_bound_dominates_measured_value():
    yf, s = make_power(3), 0.5
    r = profile_truncated(yf, s, 1.0, QuadratureSpec(eps_schedule=(0.1,)))
    bound = profile_residual_bound(yf, s, 1.0, 0.1)
    assert 0 < bound and abs(r.value) <= bound


def test_exterior_correction_zero_v():
    u = lattice_1d(smooth_bump(XS, 0, 0.5))
    assert exterior_correction(make_power(3), u, lattice_1d(np.zeros(M1)), [0.0], 0.5) == 0.0


def test_exterior_correction_sign_for_positive_v():
    v = lattice_1d(smooth_bump(XS, 0.6, 0.2))
    assert exterior_correction(make_power(3), lattice_1d(np.zeros(M1)), v, [-0.2], 0.5) < 0


def test_exterior_correction_needs_separated_support():
    v = lattice_1d(smooth_bump(XS, 0.0, 0.4))
    with pytest.raises(HypothesisViolationError):
        exterior_correction(make_power(3), lattice_1d(np.zeros(M1)), v, [0.1], 0.5)


def test_exterior_modification_identity():
    yf, s = make_power_sum(3, 4), 0.4
    u = lattice_1d(smooth_bump(XS, -0.1, 0.7))
    v = lattice_1d(0.8 * smooth_bump(XS, 0.6, 0.25))
    x = [-0.3]
    lhs = pointwise_apply(yf, lattice_1d(u.values + v.values), x, s).value - pointwise_apply(yf, u, x, s).value
    assert lhs == pytest.approx(exterior_correction(yf, u, v, x, s), rel=1e-4)


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=8, deadline=None)
@given(c=st.floats(-0.5, 0.5), w=st.floats(0.15, 0.6), tau=st.floats(-3, 3), x=st.floats(-1, 1))
def test_translation_invariance(c, w, tau, x):
    yf, s = make_power(3), 0.5
    a = pointwise_apply(yf, gaussian_bump((c,), w), [x], s).extrapolated
    b = pointwise_apply(yf, gaussian_bump((c + tau,), w), [x + tau], s).extrapolated
    assert b == pytest.approx(a, rel=1e-7, abs=1e-9)


@settings(max_examples=4, deadline=None)
@given(theta=st.floats(0, 2 * np.pi), x=st.tuples(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4)))
def test_rotation_invariance_2d(theta, x):
    yf, s = make_power(3), 0.5
    A = np.diag([1 / 0.3**2, 1 / 0.5**2])
    O = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    B = O @ A @ O.T

    def aniso(M):
        return AnalyticFunction(lambda p: np.exp(-0.5 * np.einsum("ki,ij,kj->k", p, M, p)), 2)

    q = QuadratureSpec(n_theta=48, eps_schedule=tuple(2.0 ** -np.arange(3, 8)))
    x = np.array(x)
    a = pointwise_apply(yf, aniso(A), x, s, q).extrapolated
    b = pointwise_apply(yf, aniso(B), O @ x, s, q).extrapolated
    assert b == pytest.approx(a, rel=1e-4)


def test_lattice_rotation_by_quarter_turn():
    yf, s = make_power(3), 0.5
    m = 33
    h = 2.0 / (m - 1)
    f = lambda p: np.exp(-(p[:, 0] ** 2 / 0.08 + (p[:, 1] - 0.1) ** 2 / 0.2)) * (1 - p[:, 0] ** 2) * (1 - p[:, 1] ** 2)  # noqa: E731
    u = lattice_from_function(f, (-1.0, -1.0), h, (m, m))
    ur = LatticeFunction(np.rot90(u.values), (-1.0, -1.0), h, Exterior.zero())
    q = QuadratureSpec(n_theta=32, eps_schedule=(h, h / 2))
    x = np.array([0.25, -0.125])
    O = np.array([[0.0, -1.0], [1.0, 0.0]])
    a = pointwise_apply(yf, u, x, s, q).value
    b = pointwise_apply(yf, ur, O @ x, s, q).value
    assert b == pytest.approx(a, rel=1e-3)


@settings(max_examples=6, deadline=None)
@given(R=st.floats(0.5, 3.0), x=st.floats(-0.6, 0.6))
def test_scaling_identity_pointwise(R, x):
    yf, s = make_power_sum(3, 4), 0.5
    w = 0.4
    u = gaussian_bump((0.0,), w)
    uR = gaussian_bump((0.0,), w / R)  # u(R .)
    sched = tuple(2.0**-k for k in range(3, 11))
    # cutoff eps on the unit scale is cutoff R eps on the original one
    a = pointwise_apply(rescale(yf, R, s), uR, [x], s, QuadratureSpec(eps_schedule=sched))
    b = pointwise_apply(yf, u, [R * x], s, QuadratureSpec(eps_schedule=tuple(R * e for e in sched)))
    assert np.allclose(a.values, R**s * np.asarray(b.values), rtol=1e-8, atol=1e-11)
    assert a.extrapolated == pytest.approx(R**s * b.extrapolated, rel=1e-6, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**20))
def test_nonnegative_at_global_maximum(seed):
    rng = np.random.default_rng(seed)
    vals = np.zeros(M1)
    vals[8:-8] = rng.random(M1 - 16)
    u = lattice_1d(vals)
    k = int(np.argmax(vals))
    r = pointwise_apply(make_power(3), u, [XS[k]], 0.5)
    assert min(r.values) >= -1e-10


@settings(max_examples=6, deadline=None)
@given(c=st.floats(-0.5, 0.5), w=st.floats(0.15, 0.8), amp=st.floats(0.1, 3), s=st.floats(0.2, 0.8),
       x=st.floats(-2, 2))
def test_bump_never_exceeds_ceiling(c, w, amp, s, x):
    yf = make_power_sum(3, 4)
    b = gaussian_bump((c,), w, amp)
    r = pointwise_apply(yf, b, [x], s)
    assert abs(r.extrapolated) <= lieberman_bound(yf, *b.norms, 1, s)
