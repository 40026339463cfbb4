"""Pointwise and weak evaluation of the fractional g-Laplacian.

The operator at ``x`` is evaluated along rays.  For a direction ``e`` the two
opposite rays are summed before integrating, so the near-field integrand is a
symmetric second difference and stays integrable for ``C^{1,1}`` data.  The
radial integral is cut at a schedule of inner radii ``eps_k``; the value at the
smallest cutoff is reported together with a Richardson extrapolation whose
order is read off the schedule.

Beyond the region where ``u`` is given explicitly the contribution comes from
the exterior rule.  Wherever ``u`` vanishes identically beyond radius ``r`` the
radial integral is exact:

    int_r^inf g(c rho^-s) rho^(-1-s) d rho = sign(c) G(|c| r^-s) / (s |c|).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .discrete import form_for
from .errors import (
    ConfigurationError,
    DivergentTailError,
    DomainError,
    HypothesisViolationError,
    InsufficientExteriorDataError,
    InvalidTestFunctionError,
)
from .lattice import AnalyticFunction, LatticeFunction, as_points
from .young import YoungFunction, g_inverse, sphere_measure

DEFAULT_SCHEDULE = tuple(2.0**-k for k in range(3, 11))


@dataclass(frozen=True)
class QuadratureSpec:
    """Cutoffs and far-field treatment for principal-value integrals.

    ``eps`` is the smallest cutoff; if only ``eps`` is given the schedule is
    ``eps * 2^k`` for ``k = 7..0``.  ``assumed_order=None`` means the
    extrapolation order is measured from the last three cutoffs.
    """

    eps: float | None = None
    R_far: float = 1e3
    eps_schedule: tuple | None = None
    far_tail_mode: str = "analytic_bound"
    assumed_order: float | None = None
    n_theta: int = 64
    gl_points: int = 16

    def __post_init__(self):
        sched = self.eps_schedule
        if sched is None:
            sched = DEFAULT_SCHEDULE if self.eps is None else tuple(self.eps * 2.0**k for k in range(7, -1, -1))
        sched = tuple(float(e) for e in sched)
        if len(sched) < 1 or any(e <= 0 for e in sched):
            raise ConfigurationError("eps_schedule must hold positive cutoffs")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ConfigurationError("eps_schedule must be strictly decreasing")
        eps = sched[-1] if self.eps is None else float(self.eps)
        if eps < sched[-1]:
            sched = sched + (eps,)
        elif eps != sched[-1]:
            raise ConfigurationError("eps must be the smallest cutoff of the schedule")
        if not (0 < eps < self.R_far):
            raise ConfigurationError("need 0 < eps < R_far")
        if self.far_tail_mode not in ("truncate", "analytic_bound"):
            raise ConfigurationError(f"unknown far_tail_mode {self.far_tail_mode!r}")
        object.__setattr__(self, "eps_schedule", sched)
        object.__setattr__(self, "eps", eps)

    @classmethod
    def from_config(cls, cfg: dict | None):
        cfg = dict(cfg or {})
        if "eps_schedule" in cfg:
            cfg["eps_schedule"] = tuple(cfg["eps_schedule"])
        return cls(**cfg)


@dataclass
class PVResult:
    """Principal-value evaluation over a cutoff schedule."""

    value: float
    extrapolated: float
    order: float
    eps: tuple
    values: tuple
    converged: bool
    inner_bound: float = float("nan")
    tail_width: float = 0.0
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.extrapolated)

    def to_dict(self):
        return {
            "value": self.value,
            "extrapolated": self.extrapolated,
            "order": self.order,
            "eps": list(self.eps),
            "values": list(self.values),
            "converged": self.converged,
            "inner_bound": self.inner_bound,
            "tail_width": self.tail_width,
        }


def extrapolate(eps, values, assumed_order=None):
    """Richardson extrapolation over a geometric schedule.

    Returns ``(limit, order, converged)``.  The order is measured from the
    last three values unless ``assumed_order`` is given.
    """
    v = np.asarray(values, dtype=float)
    e = np.asarray(eps, dtype=float)
    if v.size < 2:
        return float(v[-1]), float("nan"), True
    rho = e[-2] / e[-1]
    d1 = v[-1] - v[-2]
    if assumed_order is not None:
        order = float(assumed_order)
    elif v.size >= 3:
        d0 = v[-2] - v[-3]
        rho0 = e[-3] / e[-2]
        if d1 == 0.0:
            return float(v[-1]), float("inf") if d0 != 0 else float("nan"), True
        if d0 == 0.0:
            return float(v[-1]), float("nan"), False
        # d_k ~ C eps_k^p (1 - rho^-p): ratio of successive differences is rho^p
        order = math.log(abs(d0) / abs(d1)) / math.log(math.sqrt(rho * rho0))
    else:
        return float(v[-1]), float("nan"), True
    if not np.isfinite(order) or order <= 0:
        return float(v[-1]), order, False
    return float(v[-1] + d1 / (rho**order - 1.0)), order, True


def empirical_order(eps, values) -> float:
    """Least-squares slope of ``log |V_k - V_{k+1}|`` against ``log eps_k``."""
    v = np.asarray(values, dtype=float)
    e = np.asarray(eps, dtype=float)
    d = np.abs(np.diff(v))
    ok = d > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(e[:-1][ok]), np.log(d[ok]), 1)[0])


def exterior_zero_tail(yf: YoungFunction, c, r, s):
    """``int_r^inf g(c rho^-s) rho^(-1-s) d rho`` in closed form."""
    c = np.asarray(c, dtype=float)
    ac = np.abs(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sign(c) * yf.G(ac * np.asarray(r, dtype=float) ** (-s)) / (s * np.where(ac > 0, ac, 1.0))
    return np.where(ac > 0, out, 0.0)


# ---------------------------------------------------------------------------
# ray machinery


def _directions(dim, n_theta, full_circle=False):
    if dim == 1:
        return (np.array([[1.0]]), np.ones(1)) if not full_circle else (np.array([[1.0], [-1.0]]), np.ones(2))
    if full_circle:
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        return np.stack([np.cos(th), np.sin(th)], -1), np.full(n_theta, 2 * np.pi / n_theta)
    th = np.pi * np.arange(n_theta) / n_theta
    return np.stack([np.cos(th), np.sin(th)], -1), np.full(n_theta, np.pi / n_theta)


def _box_exit(lower, upper, x, e):
    lo, hi = np.array(lower), np.array(upper)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(e > 0, (hi - x) / e, np.where(e < 0, (lo - x) / e, np.inf))
    return float(np.min(t))


def _grid_crossings(u: LatticeFunction, x, e, r_max):
    out = []
    for k in range(u.dim):
        if e[k] == 0:
            continue
        lines = u.lower[k] + u.h * np.arange(u.shape[k])
        r = (lines - x[k]) / e[k]
        out.append(r[(r > 0) & (r < r_max)])
    return np.concatenate(out) if out else np.zeros(0)


class _Ray:
    """One half-ray ``x + r e``: where data is explicit and what lies beyond."""

    def __init__(self, u, x, e, q: QuadratureSpec):
        self.e = e
        self.breaks = []
        if isinstance(u, LatticeFunction):
            L = _box_exit(u.lower, u.upper, x, e)
            self.breaks = list(_grid_crossings(u, x, e, L))
            self.kind = u.exterior.kind
            self.L = L
            self.smooth = False
        else:
            exit_ = u.support_exit(x, e) if u.support_exit is not None else np.inf
            self.breaks = [r for r in u.breaks(x, e)]
            self.smooth = True
            if np.isfinite(exit_):
                self.kind, self.L = "zero", float(exit_)
            else:
                self.kind, self.L = "analytic", float(q.R_far)
        self.breaks = [r for r in self.breaks if 0 < r < self.L]


def _quad(f, a, b, points=None):
    pts = None
    if points is not None:
        pts = sorted(p for p in points if a < p < b) or None
    if np.isinf(b):
        total = 0.0
        edges = [a] + (pts or [])
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
        # far tails are often below epsabs, where QUADPACK misreads roundoff as divergence
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return total + integrate.quad(f, edges[-1], np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return integrate.quad(f, a, b, points=pts, epsabs=1e-13, epsrel=1e-11, limit=400)[0]


def _half_ray_integrand(yf, u, x, ux, e, s):
    def f(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        vals = u(x[None, :] + r[:, None] * e[None, :])
        return yf.g((ux - vals) / r**s) * r ** (-1.0 - s)

    return f


def _pair_pieces(yf, u, x, ux, e, s, q, sched):
    """Cumulative radial integrals over both half-rays along ``+-e``.

    Returns ``(V, width)`` with ``V[k]`` the integral over ``r > sched[k]``.
    """
    rays = [_Ray(u, x, sg * e, q) for sg in (1.0, -1.0)]
    r_top = max(r.L for r in rays)
    if sched[-1] >= min(r.L for r in rays):
        raise DomainError("the smallest cutoff reaches past the data region")

    def F(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        for ray in rays:
            m = r < ray.L
            if m.any():
                rr = r[m]
                vals = u(x[None, :] + rr[:, None] * ray.e[None, :])
                out[m] += yf.g((ux - vals) / rr**s)
        return out * r ** (-1.0 - s)

    brk = set(sched)
    for ray in rays:
        brk.add(ray.L)
        brk.update(ray.breaks)
    brk = np.array(sorted(b for b in brk if sched[-1] <= b <= r_top))
    a, b = brk[:-1], brk[1:]
    if rays[0].smooth:
        seg = np.array([_quad(lambda t: float(F(t)[0]), lo, hi) for lo, hi in zip(a, b)])
    else:
        xg, wg = leggauss(q.gl_points)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        r = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        seg = (F(r).reshape(a.size, -1) @ wg) * half

    tail, width = 0.0, 0.0
    for ray in rays:
        if ray.kind == "zero":
            tail += float(exterior_zero_tail(yf, ux, ray.L, s))
        elif ray.kind == "bounded":
            M = u.exterior.bound
            lo_ = float(exterior_zero_tail(yf, ux - M, ray.L, s))
            hi_ = float(exterior_zero_tail(yf, ux + M, ray.L, s))
            tail += 0.5 * (lo_ + hi_)
            width += hi_ - lo_
        else:
            f = _half_ray_integrand(yf, u, x, ux, ray.e, s)
            f1 = lambda t: float(f(t)[0])  # noqa: E731
            start = ray.L
            if isinstance(u, LatticeFunction) and start < q.R_far:
                tail += _quad(f1, start, q.R_far)
                start = q.R_far
            if q.far_tail_mode == "analytic_bound":
                tail += _quad(f1, start, np.inf)

    V = np.empty(len(sched))
    for k, ek in enumerate(sched):
        V[k] = seg[a >= ek].sum() + tail
    return V, width


def _local_norms(u, x, delta):
    """Central-difference estimates of ``|grad u|`` and ``|D^2 u|`` near ``x``."""
    n = x.size
    eye = np.eye(n) * delta
    f0 = u(x[None, :])[0]
    grad = np.array([(u(x + eye[k])[0] - u(x - eye[k])[0]) / (2 * delta) for k in range(n)])
    H = np.zeros((n, n))
    for k in range(n):
        for m in range(n):
            if k == m:
                H[k, k] = (u(x + eye[k])[0] - 2 * f0 + u(x - eye[k])[0]) / delta**2
            else:
                H[k, m] = (
                    u(x + eye[k] + eye[m])[0] - u(x + eye[k] - eye[m])[0] - u(x - eye[k] + eye[m])[0]
                    + u(x - eye[k] - eye[m])[0]
                ) / (4 * delta**2)
    return float(np.linalg.norm(grad)), float(np.linalg.norm(H, 2))


def pointwise_apply(yf: YoungFunction, u, x, s: float, q: QuadratureSpec | None = None) -> PVResult:
    """``2 int_{|x-y|>eps} g((u(x)-u(y))/|x-y|^s) |x-y|^(-n-s) dy`` over the cutoff schedule."""
    if not (0 < s < 1):
        raise DomainError("s must lie in (0, 1)")
    q = q or QuadratureSpec()
    dim = u.dim
    x = as_points(x, dim)[0]
    sched = q.eps_schedule
    if isinstance(u, LatticeFunction):
        if not u.inside(x)[0]:
            raise DomainError("x must lie in the box of u")
        if u.exterior.kind == "bounded":
            lo, hi = np.array(u.lower), np.array(u.upper)
            if float(np.min(np.minimum(x - lo, hi - x))) <= q.eps_schedule[0]:
                raise InsufficientExteriorDataError("x is within the cutoff of the box boundary")
    ux = float(u(x[None, :])[0])
    dirs, w = _directions(dim, q.n_theta)
    V = np.zeros(len(sched))
    width = 0.0
    for e, we in zip(dirs, w):
        Vd, wd = _pair_pieces(yf, u, x, ux, e, s, q, sched)
        V += we * Vd
        width += we * wd
    V *= 2.0
    width *= 2.0
    limit, order, ok = extrapolate(sched, V, q.assumed_order)

    if isinstance(u, AnalyticFunction) and u.norms is not None:
        _, gr, he = u.norms
    else:
        step = u.h if isinstance(u, LatticeFunction) else max(sched[-1], 1e-4)
        gr, he = _local_norms(u, x, step)
    inner = float(yf.g_prime(2 * gr)) * he * sphere_measure(dim) * sched[-1] ** (2 - 2 * s) / (2 * (1 - s))
    return PVResult(float(V[-1]), limit, order, tuple(sched), tuple(float(v) for v in V), ok, inner, width)


# ---------------------------------------------------------------------------
# weak form


def _check_test_function(u: LatticeFunction, phi: LatticeFunction):
    if phi.shape != u.shape or phi.lower != u.lower or phi.h != u.h:
        raise ConfigurationError("phi must live on the grid of u")
    if phi.exterior.kind != "zero":
        raise InvalidTestFunctionError("test functions must vanish outside the box")
    edge = np.ones(phi.shape, dtype=bool)
    edge[tuple(slice(1, -1) for _ in phi.shape)] = False
    if np.any(phi.values[edge] != 0):
        raise InvalidTestFunctionError("test function is nonzero on the box boundary")


def _check_zero_trace(u: LatticeFunction):
    edge = np.ones(u.shape, dtype=bool)
    edge[tuple(slice(1, -1) for _ in u.shape)] = False
    if np.any(u.values[edge] != 0):
        raise DomainError("u must vanish on the box boundary when its exterior is zero")


def weak_pairing(yf: YoungFunction, u: LatticeFunction, phi: LatticeFunction, s: float, q: QuadratureSpec | None = None,
                 n_theta: int = 128) -> float:
    """Discrete ``iint g(D_s u) D_s phi dmu`` over ``R^n x R^n``.

    Equals the derivative of the discrete modular at ``u`` in direction
    ``phi``.  A non-zero exterior of ``u`` adds the cross term between the box
    and its complement by radial quadrature from every node.
    """
    _check_test_function(u, phi)
    q = q or QuadratureSpec()
    form = form_for(yf, u, s, n_theta)
    xphi = form.free_values(phi)
    if u.exterior.kind == "zero":
        _check_zero_trace(u)
        return float(form.modular_and_grad(form.free_values(u))[1] @ xphi)
    if u.exterior.kind == "bounded":
        raise InsufficientExteriorDataError("the pairing needs exterior values, not only a bound")
    # box x box part from the pair sums; the complement part by rays
    xu = form.free_values(u)
    _, g_pairs = form._pairs(xu)
    _, g_diag = form._diagonal(xu)
    total = float((g_pairs + g_diag) @ xphi)
    dirs, w = _directions(u.dim, n_theta, full_circle=True)
    nodes = form.nodes[: form.nfree]
    vol = form.v[: form.nfree]
    for i in np.flatnonzero(xphi):
        xi = nodes[i]
        acc = 0.0
        for e, we in zip(dirs, w):
            L = _box_exit(u.lower, u.upper, xi, e)
            f = _half_ray_integrand(yf, u, xi, xu[i], e, s)
            f1 = lambda t: float(f(t)[0]) * t ** (-s)  # noqa: E731
            acc += we * _quad(f1, L, q.R_far if q.far_tail_mode == "truncate" else np.inf)
        total += 2.0 * vol[i] * xphi[i] * acc
    return total


def s_holder_quotient(u, x, y, s: float) -> float:
    """``(u(x) - u(y)) / |x - y|^s``."""
    dim = u.dim
    x = as_points(x, dim)[0]
    y = as_points(y, dim)[0]
    r = float(np.linalg.norm(x - y))
    if r == 0:
        raise DomainError("the Hölder quotient needs x != y")
    return float((u(x[None, :])[0] - u(y[None, :])[0]) / r**s)


# ---------------------------------------------------------------------------
# tails


def _growth_exponent(u, x, e):
    r = np.array([1e2, 1e4])
    vals = np.abs(u(x[None, :] + r[:, None] * e[None, :]))
    if np.any(vals == 0):
        return -np.inf
    return float(np.log(vals[1] / vals[0]) / np.log(r[1] / r[0]))


def tail(yf: YoungFunction, u, x, R: float, mode: str = "g", s: float = 0.5, n_theta: int = 128,
         gl_points: int = 16) -> float:
    """Nonlocal tail of ``u`` outside ``B_R(x)`` (``mode`` in g, p_plus, p_minus)."""
    if R <= 0:
        raise DomainError("R must be positive")
    if mode not in ("g", "p_plus", "p_minus"):
        raise ConfigurationError(f"unknown tail mode {mode!r}")
    dim = u.dim
    x = as_points(x, dim)[0]
    if mode == "g":
        lam_eff = yf.Lam

        def kernel(val, r):
            return yf.g(R**s * np.abs(val) / r**s) * r ** (-1.0 - s)
    else:
        p = yf.p_plus if mode == "p_plus" else yf.p_minus
        lam_eff = p - 1.0

        def kernel(val, r):
            return np.abs(val) ** (p - 1.0) * r ** (-1.0 - s * p)

    limit = s + s / lam_eff
    dirs, w = _directions(dim, n_theta, full_circle=True)
    xg, wg = leggauss(gl_points)
    total = 0.0
    for e, we in zip(dirs, w):
        if isinstance(u, LatticeFunction):
            L = _box_exit(u.lower, u.upper, x, e)
            acc = 0.0
            if L > R:
                brk = np.unique(np.concatenate([[R, L], _grid_crossings(u, x, e, L)]))
                brk = brk[brk >= R]
                a, b = brk[:-1], brk[1:]
                mid, half = 0.5 * (a + b), 0.5 * (b - a)
                r = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
                vals = u(x[None, :] + r[:, None] * e[None, :])
                acc += float(((kernel(vals, r)).reshape(a.size, -1) @ wg) @ half)
            start = max(L, R)
            if u.exterior.kind == "bounded":
                M = u.exterior.bound
                acc += _quad(lambda t: float(kernel(M, t)), start, np.inf)
            elif u.exterior.kind == "analytic":
                if _growth_exponent(u, x, e) >= limit - 1e-9:
                    raise DivergentTailError("exterior growth makes the tail integral diverge")
                acc += _quad(lambda t: float(kernel(u(x[None, :] + t * e[None, :])[0], t)), start, np.inf)
        else:
            exit_ = u.support_exit(x, e) if u.support_exit is not None else np.inf
            if not np.isfinite(exit_) and _growth_exponent(u, x, e) >= limit - 1e-9:
                raise DivergentTailError("growth of u makes the tail integral diverge")
            acc = 0.0
            if exit_ > R:
                f = lambda t: float(kernel(u(x[None, :] + t * e[None, :])[0], t))  # noqa: E731
                acc = _quad(f, R, exit_, points=u.breaks(x, e))
        total += we * acc
    if mode == "g":
        return float(g_inverse(yf, R**s * total))
    return float((R ** (s * p) * total) ** (1.0 / (p - 1.0)))


# ---------------------------------------------------------------------------
# closed forms and bounds


def lieberman_bound(yf: YoungFunction, sup_u: float, sup_grad: float, sup_hess: float, n: int, s: float) -> float:
    """``K = (n w_n / s) g(2|phi|) + (n w_n / (2(1-s))) g'(2|grad phi|) |D^2 phi|``."""
    if min(sup_u, sup_grad, sup_hess) < 0:
        raise DomainError("norms must be nonnegative")
    if not (0 < s < 1):
        raise DomainError("s must lie in (0, 1)")
    area = sphere_measure(n)
    gp = float(yf.g_prime(2.0 * sup_grad)) if sup_hess > 0 else 0.0
    return float(area / s * yf.g(2.0 * sup_u) + area / (2 * (1 - s)) * gp * sup_hess)


def profile_I1(yf: YoungFunction, s: float, x: float) -> float:
    """Left-half-line part of the operator on ``y_+^s`` at ``x > 0``: ``x^-s G(1) / s``."""
    if x <= 0:
        raise DomainError("x must be positive")
    return float(x ** (-s) * yf.G(1.0) / s)


def profile_I1_numeric(yf: YoungFunction, s: float, x: float) -> float:
    """Adaptive quadrature of ``int_{-inf}^0 g(x^s / |x-y|^s) |x-y|^(-1-s) dy``."""
    if x <= 0:
        raise DomainError("x must be positive")
    f = lambda r: float(yf.g(x**s / r**s)) * r ** (-1.0 - s)  # noqa: E731
    return float(_quad(f, x, 2 * x) + _quad(f, 2 * x, np.inf))


def profile_residual_bound(yf: YoungFunction, s: float, x: float, eps: float) -> float:
    """Bound on the truncated operator of ``y_+^s`` at ``x`` with cutoff ``eps``.

    The constant in front of the first term is ``2^{p+}``.
    """
    if not (0 < eps < x):
        raise DomainError("need 0 < eps < x")
    qv = (x**s - (x - eps) ** s) / eps**s
    C = 2.0**yf.p_plus
    return float(x ** (-s) / s * (C * qv + yf.G(qv)))


def profile_truncated(yf: YoungFunction, s: float, x: float, q: QuadratureSpec | None = None) -> PVResult:
    """``I_eps`` for ``y_+^s`` at ``x`` (the truncated integral without the factor 2)."""
    from .lattice import power_profile

    res = pointwise_apply(yf, power_profile(s), np.array([x]), s, q)
    half = tuple(v / 2 for v in res.values)
    return PVResult(res.value / 2, res.extrapolated / 2, res.order, res.eps, half, res.converged, res.inner_bound / 2)


def exterior_correction(yf: YoungFunction, u, v: LatticeFunction, x, s: float, q: QuadratureSpec | None = None,
                        gl_points: int = 12) -> float:
    """``2 int_{supp v} [g((u(x)-u(y)-v(y))/r^s) - g((u(x)-u(y))/r^s)] r^(-n-s) dy``.

    Integrated cell by cell over the support of the interpolant of ``v`` with
    tensor Gauss-Legendre rules.
    """
    if v.exterior.kind != "zero":
        raise ConfigurationError("v must vanish outside its box")
    dim = v.dim
    x = as_points(x, dim)[0]
    if v.support_distance(x) <= 0:
        raise HypothesisViolationError("the evaluation point touches the support of v")
    nz = v.support_nodes()
    if nz.size == 0:
        return 0.0
    # cells with a nonzero corner
    cells = set()
    for idx in map(tuple, nz):
        for off in np.ndindex(*([2] * dim)):
            c = tuple(i - o for i, o in zip(idx, off))
            if all(0 <= ci < m - 1 for ci, m in zip(c, v.shape)):
                cells.add(c)
    cells = np.array(sorted(cells))
    xg, wg = leggauss(gl_points)
    t = 0.5 * (xg + 1.0)
    wt = 0.5 * wg
    if dim == 1:
        loc = t[:, None] * v.h
        wloc = wt * v.h
    else:
        A, B = np.meshgrid(t, t, indexing="ij")
        loc = np.stack([A.ravel(), B.ravel()], -1) * v.h
        wloc = np.outer(wt, wt).ravel() * v.h**2
    corner = np.array(v.lower) + v.h * cells
    pts = (corner[:, None, :] + loc[None, :, :]).reshape(-1, dim)
    ux = float(u(x[None, :])[0])
    uy = u(pts)
    vy = v(pts)
    r = np.linalg.norm(pts - x, axis=-1)
    integrand = (yf.g((ux - uy - vy) / r**s) - yf.g((ux - uy) / r**s)) * r ** (-dim - s)
    return float(2.0 * np.sum(integrand.reshape(cells.shape[0], -1) @ wloc))
