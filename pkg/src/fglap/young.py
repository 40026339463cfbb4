"""Young functions G with derivative g satisfying the Lieberman condition.

A :class:`YoungFunction` bundles ``g``, ``g'`` and ``G`` together with the
declared ellipticity constants ``lam <= t g'(t)/g(t) <= Lam``.  Everything is
vectorised over numpy arrays; ``g`` is extended oddly and ``G`` evenly to the
negative axis.

Families with a closed form as a finite sum of powers (``power``,
``power_sum`` and their rescalings) carry that representation in
:attr:`YoungFunction.terms`, which the energy kernels use as a fast path.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidYoungFunctionError, RejectedParameterError

Array = np.ndarray

# bisection steps after bracketing in g_inverse
_BISECTION_STEPS = 80


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """A Young function with ellipticity constants ``lam`` and ``Lam``.

    ``g_pos``, ``g_prime_pos`` and ``G_pos`` act on nonnegative arrays; use the
    public methods :meth:`g`, :meth:`g_prime` and :meth:`G`, which extend them
    to the whole line.

    ``terms`` is either empty or a tuple of ``(c, e)`` pairs meaning
    ``g(t) = sum c * t**(e - 1)`` and ``G(t) = sum c * t**e / e``.
    """

    name: str
    lam: float
    Lam: float
    g_pos: Callable[[Array], Array]
    g_prime_pos: Callable[[Array], Array]
    G_pos: Callable[[Array], Array]
    terms: tuple = ()
    params: dict = field(default_factory=dict)
    outside_hypotheses: bool = False

    @property
    def p_minus(self) -> float:
        return self.lam + 1.0

    @property
    def p_plus(self) -> float:
        return self.Lam + 1.0

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * self.g_pos(np.abs(t))

    def g_prime(self, t):
        t = np.asarray(t, dtype=float)
        return self.g_prime_pos(np.abs(t))

    def G(self, t):
        t = np.asarray(t, dtype=float)
        return self.G_pos(np.abs(t))

    def G_log_integral(self, tau):
        """Return ``int_0^tau G(t)/t dt`` for ``tau >= 0``.

        This is the radial primitive needed for exterior contributions:
        ``int_R^inf G(c r^-s) dr/r = G_log_integral(c R^-s) / s``.
        """
        tau = np.asarray(tau, dtype=float)
        if self.terms:
            out = np.zeros_like(tau)
            for c, e in self.terms:
                out = out + c * tau**e / (e * e)
            return out
        flat = np.atleast_1d(tau).ravel()
        vals = np.array(
            [
                integrate.quad(lambda t: self.G_pos(np.array(t)) / t, 0.0, x, epsabs=1e-13, limit=200)[0]
                if x > 0
                else 0.0
                for x in flat
            ]
        )
        return vals.reshape(tau.shape)

    def describe(self) -> dict:
        return {"family": self.params.get("family", self.name), "params": self.params.get("args", {})}


def _terms_callables(terms):
    def g_pos(t):
        out = np.zeros_like(np.asarray(t, dtype=float))
        for c, e in terms:
            out = out + c * np.power(t, e - 1.0)
        return out

    def g_prime_pos(t):
        out = np.zeros_like(np.asarray(t, dtype=float))
        for c, e in terms:
            out = out + c * (e - 1.0) * np.power(t, e - 2.0)
        return out

    def G_pos(t):
        out = np.zeros_like(np.asarray(t, dtype=float))
        for c, e in terms:
            out = out + c * np.power(t, e) / e
        return out

    return g_pos, g_prime_pos, G_pos


def make_power(p: float, outside_hypotheses: bool = False) -> YoungFunction:
    """``G(t) = t^p / p`` with ``lam = Lam = p - 1``.

    ``p <= 2`` is outside the degenerate regime treated here; ``p == 2`` may
    still be requested with ``outside_hypotheses=True``.
    """
    p = float(p)
    if not (p > 2.0 or (outside_hypotheses and p == 2.0)):
        raise RejectedParameterError(f"power family needs p > 2 (got p={p})")
    terms = ((1.0, p),)
    g_pos, gp_pos, G_pos = _terms_callables(terms)
    return YoungFunction(
        name=f"power(p={p:g})",
        lam=p - 1.0,
        Lam=p - 1.0,
        g_pos=g_pos,
        g_prime_pos=gp_pos,
        G_pos=G_pos,
        terms=terms,
        params={"family": "power", "args": {"p": p}},
        outside_hypotheses=outside_hypotheses,
    )


def make_power_sum(p: float, q: float, a: float = 1.0, b: float = 1.0) -> YoungFunction:
    """``G(t) = a t^p/p + b t^q/q``, an inhomogeneous family with ``lam < Lam``.

    One of ``a``, ``b`` may be zero, which reduces to the power family.
    """
    p, q, a, b = float(p), float(q), float(a), float(b)
    if p <= 2.0 or q <= 2.0:
        raise RejectedParameterError(f"power_sum needs p, q > 2 (got p={p}, q={q})")
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise RejectedParameterError(f"power_sum needs a, b >= 0, not both zero (got a={a}, b={b})")
    terms = tuple((c, e) for c, e in ((a, p), (b, q)) if c > 0)
    exps = [e for _, e in terms]
    g_pos, gp_pos, G_pos = _terms_callables(terms)
    return YoungFunction(
        name=f"power_sum(p={p:g},q={q:g},a={a:g},b={b:g})",
        lam=min(exps) - 1.0,
        Lam=max(exps) - 1.0,
        g_pos=g_pos,
        g_prime_pos=gp_pos,
        G_pos=G_pos,
        terms=terms,
        params={"family": "power_sum", "args": {"p": p, "q": q, "a": a, "b": b}},
    )


def from_derivative(
    g: Callable[[Array], Array],
    g_prime: Callable[[Array], Array],
    lam: float,
    Lam: float,
    name: str = "custom",
    G: Callable[[Array], Array] | None = None,
) -> YoungFunction:
    """Build a Young function from ``g`` (on ``t >= 0``) and its derivative.

    When ``G`` is not supplied it is computed by adaptive Gauss-Kronrod
    quadrature of ``g`` with absolute tolerance 1e-12.
    """
    if not (1.0 < lam <= Lam):
        raise RejectedParameterError(f"need 1 < lam <= Lam (got {lam}, {Lam})")
    if G is None:

        def G(t):
            t = np.asarray(t, dtype=float)
            flat = np.atleast_1d(t).ravel()
            vals = np.array(
                [integrate.quad(lambda x: float(g(np.array(x))), 0.0, x, epsabs=1e-12, limit=200)[0] for x in flat]
            )
            return vals.reshape(t.shape)

    return YoungFunction(
        name=name, lam=float(lam), Lam=float(Lam), g_pos=g, g_prime_pos=g_prime, G_pos=G,
        params={"family": name, "args": {}},
    )


def rescale(yf: YoungFunction, R: float, s: float) -> YoungFunction:
    """Return ``g_R(t) = g(R^-s t)``, with ``G_R(t) = R^s G(R^-s t)``."""
    c = float(R) ** (-float(s))
    terms = tuple((coef * c ** (e - 1.0), e) for coef, e in yf.terms)
    return YoungFunction(
        name=f"{yf.name}|R={R:g},s={s:g}",
        lam=yf.lam,
        Lam=yf.Lam,
        g_pos=lambda t: yf.g_pos(c * np.asarray(t, dtype=float)),
        g_prime_pos=lambda t: c * yf.g_prime_pos(c * np.asarray(t, dtype=float)),
        G_pos=lambda t: yf.G_pos(c * np.asarray(t, dtype=float)) / c,
        terms=terms,
        params={"family": "rescaled", "args": {"base": yf.describe(), "R": R, "s": s}},
        outside_hypotheses=yf.outside_hypotheses,
    )


def estimate_ellipticity(yf: YoungFunction, t_min: float = 1e-6, t_max: float = 1e6, n_samples: int = 2001):
    """Min and max of ``t g'(t) / g(t)`` over a logarithmic grid."""
    if not (0 < t_min < t_max):
        raise DomainError(f"need 0 < t_min < t_max (got {t_min}, {t_max})")
    if n_samples < 2:
        raise DomainError("n_samples must be at least 2")
    t = np.geomspace(t_min, t_max, int(n_samples))
    gv = yf.g(t)
    if np.any(gv <= 0):
        raise InvalidYoungFunctionError(f"{yf.name}: g vanishes at a positive sample")
    ratio = t * yf.g_prime(t) / gv
    return float(ratio.min()), float(ratio.max())


def g_inverse(yf: YoungFunction, v):
    """Solve ``g(t) = v`` for ``t >= 0`` by bracketing and bisection.

    The bracket starts at ``[0, max(1, v)]`` and doubles until ``g`` exceeds
    ``v``; then 80 bisection steps follow.  Vectorised over ``v``.
    """
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < 0) or np.any(np.isnan(v_arr)):
        raise DomainError("g_inverse is defined for v >= 0")
    flat = np.atleast_1d(v_arr).ravel()
    lo = np.zeros_like(flat)
    hi = np.maximum(1.0, flat)
    for _ in range(2000):
        short = yf.g(hi) < flat
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = yf.g(mid) < flat
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out[flat == 0] = 0.0
    if v_arr.ndim == 0:
        return float(out[0])
    return out.reshape(v_arr.shape)


def conjugate(yf: YoungFunction, w):
    """Complementary function ``sup_t (t w - G(t))``, attained at ``t = g^-1(w)``."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0):
        raise DomainError("conjugate is evaluated for w >= 0")
    t = g_inverse(yf, w_arr)
    out = w_arr * t - yf.G(t)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# inequality suite


@dataclass
class InequalityRecord:
    name: str
    samples: int
    max_violation: float
    passed: bool
    kind: str = "inequality"
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": int(self.samples),
            "max_violation": float(self.max_violation),
            "pass": bool(self.passed),
            "kind": self.kind,
            "detail": self.detail,
        }


@dataclass
class YoungReport:
    family: str
    seed: int
    rtol: float
    records: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list:
        return [r.name for r in self.records if not r.passed]

    def __getitem__(self, name: str) -> InequalityRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "seed": self.seed,
            "rtol": self.rtol,
            "pass": bool(self.passed),
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _record(name, lhs, rhs, scale, rtol, kind="inequality", detail=""):
    """Record ``lhs <= rhs``; violation is measured relative to ``scale``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.asarray(scale, dtype=float), np.finfo(float).tiny)
    slack = (lhs - rhs) / scale
    finite = np.isfinite(slack)
    worst = float(np.max(slack[finite])) if finite.any() else float("inf")
    ok = bool(finite.all() and worst <= rtol)
    return InequalityRecord(name, int(lhs.size), worst, ok, kind, detail)


def lema0bis_constant(yf: YoungFunction, M):
    """Constant ``C_M`` with ``g(a) - g(a-b) <= C_M max(b, g(b))`` for ``|a| <= M``.

    For ``b <= M`` the difference quotient is controlled by ``g'`` on
    ``[-2M, 2M]``, giving ``g'(2M)``.  For ``b >= M`` one has
    ``|a - b| <= 2b`` and ``g(M) <= g(b)``, giving ``1 + 2^Lam``.
    """
    M = np.asarray(M, dtype=float)
    return np.maximum(yf.g_prime(2 * M), 1.0 + 2.0**yf.Lam)


def lema0bis_constant_naive(yf: YoungFunction, M):
    """``max(g'(M), (g(M) + g(2M)) / g(M))``; too small when ``b <= M`` and ``a < 0``."""
    M = np.asarray(M, dtype=float)
    return np.maximum(yf.g_prime(M), (yf.g(M) + yf.g(2 * M)) / yf.g(M))


def separa_constant(yf: YoungFunction, theta):
    """``C_theta = 2^(j Lam)`` with ``j = ceil(log2(1/theta + 1))``."""
    j = np.ceil(np.log2(1.0 / np.asarray(theta, dtype=float) + 1.0))
    return 2.0 ** (j * yf.Lam)


def _structural_records(yf: YoungFunction, rtol: float) -> list:
    recs = []
    t = np.geomspace(1e-6, 1e6, 2001)
    gv = yf.g(t)
    g0 = float(yf.g(np.array(0.0)))
    ok = g0 == 0.0 and bool(np.all(gv > 0)) and bool(np.all(np.diff(gv) >= -rtol * gv[1:])) and gv[-1] > gv[0]
    recs.append(InequalityRecord("g1_g3_positivity_monotonicity", t.size, 0.0 if ok else 1.0, ok, "structural"))

    # convexity: g(t_k) below the chord through its neighbours
    tl, tm, tr = t[:-2], t[1:-1], t[2:]
    chord = ((tr - tm) * gv[:-2] + (tm - tl) * gv[2:]) / (tr - tl)
    recs.append(_record("g4_convexity", gv[1:-1], chord, np.abs(chord), rtol * 1e2, "structural"))

    lam_hat, Lam_hat = estimate_ellipticity(yf, 1e-6, 1e6, 2001)
    tol = 1e-8 * max(1.0, yf.Lam)
    viol = max(yf.lam - lam_hat, Lam_hat - yf.Lam)
    recs.append(
        InequalityRecord(
            "lieberman_L", 2001, viol, viol <= tol, "structural", f"estimated [{lam_hat:.6g}, {Lam_hat:.6g}]"
        )
    )
    ratio = t * gv / yf.G(t)
    lo_v = np.max((yf.p_minus - ratio) / yf.p_minus)
    hi_v = np.max((ratio - yf.p_plus) / yf.p_plus)
    viol = float(max(lo_v, hi_v))
    recs.append(InequalityRecord("eq_p_ratio", t.size, viol, viol <= 1e-8, "structural"))
    ok = yf.p_minus > 2.0 or yf.outside_hypotheses
    recs.append(InequalityRecord("p_minus_gt_2", 1, 2.0 - yf.p_minus, ok, "structural"))
    odd = float(np.max(np.abs(yf.g(-t) + gv)))
    recs.append(InequalityRecord("odd_extension", t.size, odd, odd == 0.0, "structural"))
    return recs


def check_inequality_suite(yf: YoungFunction, n_samples: int = 100_000, seed: int = 0, rtol: float = 1e-10) -> YoungReport:
    """Sample every Young-function inequality used by the regularity theory.

    Samples are drawn deterministically from ``seed``: ``a, b, t`` and the
    dilation ``alpha`` log-uniform in ``(1e-3, 1e3)``, ``theta`` uniform in
    ``(0, 1)`` and ``M`` log-uniform in ``(1e-2, 1e2)``.  A structural check
    that fails is reported as a failing record; nothing is raised.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    n = int(n_samples)

    def logu(lo, hi):
        return np.exp(rng.uniform(np.log(lo), np.log(hi), n))

    a, b, t, alpha = logu(1e-3, 1e3), logu(1e-3, 1e3), logu(1e-3, 1e3), logu(1e-3, 1e3)
    theta = rng.uniform(0.0, 1.0, n)
    theta = np.where(theta == 0.0, 0.5, theta)
    M = logu(1e-2, 1e2)
    a_M = rng.uniform(-1.0, 1.0, n) * M

    g, G = yf.g, yf.G
    lam, Lam, pm, pp = yf.lam, yf.Lam, yf.p_minus, yf.p_plus
    records = _structural_records(yf, rtol)

    gt, gat = g(t), g(alpha * t)
    lo = np.minimum(alpha**lam, alpha**Lam) * gt
    hi = np.maximum(alpha**lam, alpha**Lam) * gt
    records.append(_record("minmax1_lower", lo, gat, np.maximum(lo, gat), rtol))
    records.append(_record("minmax1_upper", gat, hi, np.maximum(hi, gat), rtol))

    Gt, Gat = G(t), G(alpha * t)
    lo = np.minimum(alpha**pm, alpha**pp) * Gt
    hi = np.maximum(alpha**pm, alpha**pp) * Gt
    records.append(_record("minmax2_lower", lo, Gat, np.maximum(lo, Gat), rtol))
    records.append(_record("minmax2_upper", Gat, hi, np.maximum(hi, Gat), rtol))

    # growth bounds with constants calibrated at t = 1
    g1, G1 = float(g(np.array(1.0))), float(G(np.array(1.0)))
    lo = g1 * np.minimum(t**lam, t**Lam)
    hi = g1 * np.maximum(t**lam, t**Lam)
    records.append(_record("growthg1_lower", lo, gt, np.maximum(lo, gt), rtol))
    records.append(_record("growthg1_upper", gt, hi, np.maximum(hi, gt), rtol))
    lo = G1 * np.minimum(t**pm, t**pp)
    hi = G1 * np.maximum(t**pm, t**pp)
    records.append(_record("growthg2_lower", lo, Gt, np.maximum(lo, Gt), rtol))
    records.append(_record("growthg2_upper", Gt, hi, np.maximum(hi, Gt), rtol))

    gab, ga, gb = g(a - b), g(a), g(b)
    lhs = gab - ga
    rhs = -(2.0 ** (1.0 - Lam)) * gb
    scale = np.maximum.reduce([np.abs(gab), np.abs(ga), np.abs(rhs)])
    records.append(_record("lema0", lhs, rhs, scale, rtol))

    gaM, gaMb = g(a_M), g(a_M - b)
    lhs = gaM - gaMb
    rhs = lema0bis_constant(yf, M) * np.maximum(b, gb)
    scale = np.maximum.reduce([np.abs(gaM), np.abs(gaMb), np.abs(rhs)])
    records.append(_record("lema0bis", lhs, rhs, scale, rtol))

    lhs = g(a + b)
    rhs = (1.0 + theta) ** Lam * ga + separa_constant(yf, theta) * gb
    records.append(_record("lema_separa", lhs, rhs, np.maximum(lhs, rhs), rtol))

    ginv = lambda v: g_inverse(yf, v)  # noqa: E731
    lhs = ginv(a + b)
    rhs = 2.0 ** (1.0 / lam) * (ginv(a) + ginv(b))
    records.append(_record("delta2_inversa", lhs, rhs, np.maximum(lhs, rhs), rtol))

    g2t = g(2 * t)
    records.append(_record("delta2_g", g2t, 2.0**Lam * gt, g2t, rtol))
    G2t = G(2 * t)
    records.append(_record("delta2_G", G2t, 2.0**pp * Gt, G2t, rtol))

    return YoungReport(yf.name, int(seed), rtol, records)


def conjugate_sweep(yf: YoungFunction, t_grid, w_grid, rtol: float = 1e-10):
    """Young's inequality ``t w <= G(t) + G~(w)`` on a grid, and its equality case.

    Returns ``(max_violation, max_equality_gap)``, both relative to
    ``max(1, t w)``.
    """
    t = np.asarray(t_grid, dtype=float)
    w = np.asarray(w_grid, dtype=float)
    Gt = yf.G(t)
    Gc = conjugate(yf, w)
    lhs = t[:, None] * w[None, :]
    rhs = Gt[:, None] + Gc[None, :]
    viol = float(np.max((lhs - rhs) / np.maximum(1.0, lhs)))
    we = yf.g(t)
    gap = np.abs(Gt + conjugate(yf, we) - t * we) / np.maximum(1.0, t * we)
    return viol, float(gap.max())


# ---------------------------------------------------------------------------
# config registry

FAMILIES: dict[str, Callable[..., YoungFunction]] = {
    "power": make_power,
    "power_sum": make_power_sum,
}


def register_family(name: str, factory: Callable[..., YoungFunction]) -> None:
    """Make ``factory`` reachable from configs as ``{"family": name}``."""
    FAMILIES[name] = factory


def young_from_config(cfg: dict) -> YoungFunction:
    family = cfg.get("family")
    if family not in FAMILIES:
        raise RejectedParameterError(f"unknown Young family {family!r}")
    params = dict(cfg.get("params", {}))
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise RejectedParameterError(f"bad parameters for {family}: {exc}") from exc


def sphere_measure(n: int) -> float:
    """``n * omega_n``, the surface measure of the unit sphere in R^n (2 for n=1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
