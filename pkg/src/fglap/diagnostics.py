"""Measured counterparts of the regularity statements: oscillation decay,
Hölder fits, boundary ratios, the distance-profile residual and a weak
Harnack constant."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, HypothesisViolationError, InsufficientDataError
from .lattice import LatticeFunction, as_points, distance_power
from .operator import QuadratureSpec, pointwise_apply, tail
from .young import YoungFunction, g_inverse, sphere_measure


@dataclass
class DiagnosticsReport:
    """Named measurements, each stamped with the grid and tolerance used."""

    entries: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    def add(self, name, value, grid=None, params=None, tolerance=None, passed=None):
        self.entries.append(
            {"name": name, "value": value, "grid": grid or {}, "params": params or {}, "tolerance": tolerance,
             "pass": passed}
        )

    def add_series(self, name, rows, columns=("r", "value")):
        self.series[name] = {"columns": list(columns), "rows": [list(map(float, r)) for r in rows]}

    @property
    def passed(self) -> bool:
        return all(e["pass"] is not False for e in self.entries)

    def __getitem__(self, name):
        for e in self.entries:
            if e["name"] == name:
                return e
        raise KeyError(name)

    def to_dict(self):
        return {"pass": self.passed, "entries": self.entries, "series": sorted(self.series)}

    def write(self, out_dir, stem="diagnostics"):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.json").write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float))
        for name, ser in sorted(self.series.items()):
            with open(out / f"{stem}_{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(ser["columns"])
                w.writerows(ser["rows"])


def _node_points(u: LatticeFunction):
    return u.nodes().reshape(-1, u.dim), u.values.ravel()


def oscillation_profile(u: LatticeFunction, x0, radii):
    """``[(r, max - min of u over nodes in the closed ball B_r(x0))]``.

    Radii whose ball holds no node are dropped with a warning.
    """
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ConfigurationError("radii must be strictly decreasing")
    pts, vals = _node_points(u)
    x0 = as_points(x0, u.dim)[0]
    dist = np.linalg.norm(pts - x0, axis=-1)
    out = []
    for r in radii:
        m = dist <= r * (1 + 1e-12)
        if not m.any():
            warnings.warn(f"ball of radius {r:g} holds no node; dropped", stacklevel=2)
            continue
        out.append((r, float(vals[m].max() - vals[m].min())))
    return out


def fit_holder_exponent(profile):
    """Least-squares fit ``log osc = alpha log r + log C``.

    Returns ``(alpha, C, rms residual of the log fit)``.
    """
    pts = [(r, o) for r, o in profile if o > 0 and r > 0]
    if len(pts) < 3:
        raise InsufficientDataError("need at least three radii with positive oscillation")
    lr = np.log([r for r, _ in pts])
    lo = np.log([o for _, o in pts])
    A = np.stack([lr, np.ones_like(lr)], -1)
    coef, *_ = np.linalg.lstsq(A, lo, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - lo) ** 2)))
    return float(coef[0]), float(math.exp(coef[1])), resid


def boundary_ratio_profile(u: LatticeFunction, d, s: float, band):
    """``sup`` and ``inf`` of ``|u| / d^s`` over nodes with ``d`` in ``band``.

    ``d`` is a callable signed distance.  Returns ``(sup, inf, samples)``
    where ``samples`` is an array of ``(d, ratio)`` rows.
    """
    lo, hi = band
    pts, vals = _node_points(u)
    dv = np.asarray(d(pts), dtype=float)
    m = (dv >= lo) & (dv <= hi)
    if not m.any():
        raise ConfigurationError(f"no node has distance in [{lo:g}, {hi:g}]")
    ratio = np.abs(vals[m]) / dv[m] ** s
    samples = np.stack([dv[m], ratio], -1)
    samples = samples[np.argsort(samples[:, 0], kind="stable")]
    return float(ratio.max()), float(ratio.min()), samples


def distance_profile_residual(yf: YoungFunction, domain, s: float, band, q: QuadratureSpec | None = None,
                              n_points: int = 6, angle: float = 0.37):
    """Operator applied to ``d_+^s`` at points with distance in ``band``.

    Points lie on one ray from the centre (the ball is rotation invariant);
    ``angle`` keeps the ray off the coordinate axes.  Returns a dict with the
    sup over the points at every cutoff, the extrapolated sup and the
    relative change between the last two cutoffs.
    """
    q = q or QuadratureSpec()
    lo, hi = band
    if lo <= q.eps_schedule[-1]:
        raise ConfigurationError("band reaches closer to the boundary than the smallest cutoff")
    if lo >= hi or hi > domain.inradius:
        raise ConfigurationError("band must satisfy 0 < d_lo < d_hi <= inradius")
    u = distance_power(domain, s)
    c = np.array(getattr(domain, "center", (0.5 * (domain.a + domain.b),) if domain.dim == 1 else None))
    e = np.array([1.0]) if domain.dim == 1 else np.array([math.cos(angle), math.sin(angle)])
    dvals = np.linspace(lo, hi, n_points)
    results = []
    for dd in dvals:
        x = c + (domain.inradius - dd) * e
        results.append(pointwise_apply(yf, u, x, s, q))
    V = np.array([r.values for r in results])  # (points, cutoffs)
    sup_by_cut = np.max(np.abs(V), axis=0)
    ext = np.array([r.extrapolated for r in results])
    change = abs(sup_by_cut[-1] - sup_by_cut[-2]) / max(sup_by_cut[-1], np.finfo(float).tiny)
    return {
        "d": dvals.tolist(),
        "eps": list(q.eps_schedule),
        "values": V.tolist(),
        "sup_by_cutoff": sup_by_cut.tolist(),
        "sup": float(sup_by_cut[-1]),
        "sup_extrapolated": float(np.max(np.abs(ext))),
        "relative_change_last_two": float(change),
        "orders": [r.order for r in results],
    }


def harnack_constant(yf: YoungFunction, n: int) -> float:
    """``C_0 = 2 / C_2`` with ``C_2 = 2^(2 - Lam) n w_n (1 - 2^-n)``."""
    C2 = 2.0 ** (2.0 - yf.Lam) * sphere_measure(n) * (1.0 - 2.0 ** (-n))
    return 2.0 / C2


@dataclass
class HarnackResult:
    sigma_hat: float
    passed: bool
    inf_inner: float
    averaged: float
    tail_term: float
    C0: float
    R: float
    K: float

    def __iter__(self):
        return iter((self.sigma_hat, self.passed))

    def to_dict(self):
        return dict(self.__dict__)


def weak_harnack_check(yf: YoungFunction, u: LatticeFunction, K: float, R: float, s: float, x0=None,
                       neg_tol: float = 1e-8) -> HarnackResult:
    """Largest ``sigma`` in (0, 1] with

        inf_{B_{R/4}} u >= sigma R^s g^-1(avg_{B_R - B_{R/2}} g(R^-s u)) - R^s g^-1(C_0 R^s K).

    Averages are node averages.  ``u`` must be nonnegative up to ``neg_tol``
    times its sup; tiny negative values are treated as zero.
    """
    if K < 0 or R <= 0:
        raise DomainError("need K >= 0 and R > 0")
    pts, vals = _node_points(u)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.any(vals < -neg_tol * scale):
        raise HypothesisViolationError("u takes negative values")
    vals = np.maximum(vals, 0.0)
    x0 = np.zeros(u.dim) if x0 is None else as_points(x0, u.dim)[0]
    dist = np.linalg.norm(pts - x0, axis=-1)
    inner = dist <= R / 4
    ring = (dist >= R / 2) & (dist <= R)
    if not inner.any() or not ring.any():
        raise InsufficientDataError("the mesh does not resolve B_{R/4} or the annulus")
    L = float(vals[inner].min())
    avg = float(np.mean(yf.g(R ** (-s) * vals[ring])))
    A = R**s * g_inverse(yf, avg)
    C0 = harnack_constant(yf, u.dim)
    T = R**s * g_inverse(yf, C0 * R**s * K)
    if A <= 0:
        sigma = 1.0
    else:
        sigma = min(1.0, (L + T) / A)
    return HarnackResult(float(sigma), bool(sigma > 0), L, float(A), float(T), C0, float(R), float(K))


def global_holder_quotient(u: LatticeFunction, alpha: float, chunk: int = 512) -> float:
    """``max |u_i - u_j| / |x_i - x_j|^alpha`` over all node pairs."""
    pts, vals = _node_points(u)
    best = 0.0
    for i0 in range(0, vals.size, chunk):
        p = pts[i0 : i0 + chunk]
        r = np.linalg.norm(p[:, None, :] - pts[None, :, :], axis=-1)
        dv = np.abs(vals[i0 : i0 + chunk, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            qv = np.where(r > 0, dv / np.where(r > 0, r, 1.0) ** alpha, 0.0)
        best = max(best, float(qv.max()))
    return best


def radial_profile_check(u: LatticeFunction, center=(0.0, 0.0), radius: float = 1.0, n_angles: int = 24,
                         window: float = 2.0):
    """Asymmetry and monotonicity of a 2D function along rays from ``center``.

    Rays use non-lattice angles.  At each sampled radius the asymmetry is the
    spread of values over angles.  The tolerance there is the variation of the
    angle-averaged profile over a radial window of ``window * h``, plus an
    ``h^2 |u|_inf`` interpolation floor.  Monotonicity is tested on the
    averaged profile with the same tolerance.
    """
    h = u.h
    c = np.asarray(center, dtype=float)
    th = (np.arange(n_angles) + 0.5) * 2 * np.pi / n_angles + 0.1
    rs = np.arange(0.0, radius + 1e-12, h / 2)
    pts = c + rs[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None, :, :]
    vals = u(pts.reshape(-1, 2)).reshape(rs.size, n_angles)
    mean = vals.mean(axis=1)
    spread = vals.max(axis=1) - vals.min(axis=1)
    floor = h * h * u.sup_norm()
    k = int(round(window * h / (h / 2)))
    tol = np.empty_like(rs)
    for i in range(rs.size):
        seg = mean[max(0, i - k) : i + k + 1]
        tol[i] = seg.max() - seg.min() + floor
    asym_ok = bool(np.all(spread <= tol))
    rises = np.diff(mean)
    mono_ok = bool(np.all(rises <= tol[1:]))
    worst = int(np.argmax(spread - tol))
    return {
        "asymmetry_ok": asym_ok,
        "monotone_ok": mono_ok,
        "max_asymmetry": float(spread.max()),
        "max_asymmetry_over_tol": float(np.max(spread / tol)),
        "worst_radius": float(rs[worst]),
        "max_rise": float(max(rises.max(), 0.0)),
        "radii": rs.tolist(),
        "profile": mean.tolist(),
    }


def torsion_diagnostics(u: LatticeFunction, yf: YoungFunction, s: float, domain, K: float = 1.0,
                        boundary_points: int = 8, report: DiagnosticsReport | None = None):
    """Standard battery on a Dirichlet solution over a ball or interval."""
    rep = report or DiagnosticsReport()
    grid = {"h": u.h, "shape": list(u.shape)}
    h = u.h
    if u.sup_norm() == 0.0:
        for name in ("holder_alpha", "boundary_ratio_sup", "boundary_ratio_inf", "sup_norm", "global_holder_quotient"):
            rep.add(name, 0.0, grid, {"note": "u vanishes identically"}, passed=True)
        return rep
    # oscillation anchored on boundary points, where the exponent is decided
    radii = np.geomspace(0.5 * domain.inradius, 3 * h, 8)
    c = np.array(getattr(domain, "center", None) or [0.5 * (domain.a + domain.b)])
    alphas = []
    for k in range(boundary_points if u.dim == 2 else 2):
        if u.dim == 2:
            th = 2 * np.pi * (k + 0.5) / boundary_points + 0.1
            x0 = c + domain.inradius * np.array([math.cos(th), math.sin(th)])
        else:
            x0 = c + domain.inradius * np.array([1.0 if k == 0 else -1.0])
        prof = oscillation_profile(u, x0, radii)
        a, C, res = fit_holder_exponent(prof)
        alphas.append(a)
        rep.add_series(f"osc_boundary_{k}", prof)
    alpha = float(np.max(alphas))
    rep.add("holder_alpha", alpha, grid, {"radii": [float(r) for r in radii], "anchors": "boundary", "all": alphas},
            tolerance=0.05, passed=bool(0 < alpha <= s + 0.05))
    prof0 = oscillation_profile(u, c, radii)
    a0, _, _ = fit_holder_exponent(prof0) if sum(o > 0 for _, o in prof0) >= 3 else (float("nan"), 0, 0)
    rep.add("holder_alpha_centre", a0, grid, {"anchors": "centre"}, passed=None)
    rep.add_series("osc_centre", prof0)

    # coarse meshes get a band at least 4h wide
    band = (4 * h, max(0.25 * domain.inradius, 8 * h))
    sup, inf, samples = boundary_ratio_profile(u, domain.signed_distance, s, band)
    rep.add("boundary_ratio_sup", sup, grid, {"band": list(band)}, passed=bool(np.isfinite(sup)))
    rep.add("boundary_ratio_inf", inf, grid, {"band": list(band)}, passed=bool(inf > 0))
    rep.add_series("boundary_ratio", samples, ("d", "ratio"))

    if u.sup_norm() > 0:
        hr = weak_harnack_check(yf, u, K, domain.inradius, s, c)
        rep.add("harnack_sigma", hr.sigma_hat, grid, hr.to_dict(), passed=hr.passed)
    rep.add("sup_norm", u.sup_norm(), grid)
    rep.add("global_holder_quotient", global_holder_quotient(u, alpha), grid, {"alpha": alpha})
    return rep


def tails_side_by_side(yf: YoungFunction, u: LatticeFunction, x0, R: float, s: float,
                       report: DiagnosticsReport | None = None):
    """The g-tail and both power tails of ``u`` outside ``B_R(x0)``, as report entries."""
    rep = report or DiagnosticsReport()
    vals = {mode: tail(yf, u, x0, R, mode, s) for mode in ("g", "p_plus", "p_minus")}
    for mode, v in vals.items():
        rep.add(f"tail_{mode}", v, {"h": u.h, "shape": list(u.shape)}, {"R": R, "x0": list(map(float, np.atleast_1d(x0)))})
    return rep
