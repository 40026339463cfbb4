"""Acceptance checks, one function per numbered criterion.

Each function returns a list of :class:`CriterionResult` (criteria with
several independent requirements report one result per requirement).  The
test-suite and the ``verify-all`` command both call :func:`run`.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .diagnostics import (
    boundary_ratio_profile,
    distance_profile_residual,
    global_holder_quotient,
    radial_profile_check,
    torsion_diagnostics,
)
from .discrete import DiscreteForm
from .domains import Ball, Interval, uniform_grid
from .errors import ConfigurationError
from .lattice import Exterior, LatticeFunction, gaussian_bump
from .operator import (
    QuadratureSpec,
    exterior_correction,
    lieberman_bound,
    pointwise_apply,
    profile_I1,
    profile_I1_numeric,
    profile_truncated,
)
from .reference import DensePLaplacian1D
from .solver import (
    DirichletProblem,
    SolverConfig,
    check_comparison,
    check_scaling,
    solve,
)
from .young import check_inequality_suite, conjugate, conjugate_sweep, make_power, make_power_sum


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    summary: str
    data: dict = field(default_factory=dict)
    runtime: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.key}: {self.title} :: {self.summary} ({self.runtime:.1f}s)"

    def to_dict(self):
        return {"key": self.key, "title": self.title, "pass": self.passed, "summary": self.summary,
                "runtime": self.runtime, "data": self.data}


def _timed(fn):
    def wrapper(*a, **k):
        t0 = time.perf_counter()
        out = fn(*a, **k)
        dt = time.perf_counter() - t0
        for r in out:
            if not r.runtime:
                r.runtime = dt
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


TORSION = {"p": 3.0, "s": 0.5, "grad_tol": 1e-8, "coarse": 64, "fine": 96}


@lru_cache(maxsize=None)
def torsion_solution(mesh_n: int):
    """Torsion problem on the unit disc (cached, shared by several criteria)."""
    prob = DirichletProblem(make_power(TORSION["p"]), TORSION["s"], Ball((0.0, 0.0), 1.0), 1.0, mesh_n)
    return prob, solve(prob, SolverConfig(grad_tol=TORSION["grad_tol"]))


# ---------------------------------------------------------------------------


@_timed
def criterion_1(n_samples: int = 100_000, seed: int = 0):
    families = [make_power(2.5), make_power(3.0), make_power(4.0), make_power_sum(3.0, 4.0)]
    data, ok, worst = {}, True, 0.0
    t0 = time.perf_counter()
    for yf in families:
        rep = check_inequality_suite(yf, n_samples=n_samples, seed=seed, rtol=1e-10)
        data[yf.name] = {r.name: r.max_violation for r in rep.records}
        ok &= rep.passed
        worst = max(worst, max(r.max_violation for r in rep.records if r.kind != "structural") if rep.records else 0.0)
        if not rep.passed:
            data[yf.name + ":failures"] = rep.failures()
    dt = time.perf_counter() - t0
    return [
        CriterionResult("1", "Young inequality suite", bool(ok), f"worst relative violation {worst:.2e} <= 1e-10", data),
        CriterionResult("1-runtime", "Young inequality suite runtime", dt < 30.0, f"{dt:.1f}s < 30s", {"seconds": dt}),
    ]


@_timed
def criterion_2():
    t = np.geomspace(1e-3, 1e3, 200)
    w = np.geomspace(1e-3, 1e3, 200)
    out = []
    yf = make_power(3.0)
    viol, gap = conjugate_sweep(yf, t, w)
    out.append(CriterionResult("2a", "Young inequality on 200x200 grid, power p=3", viol <= 1e-8 and gap < 1e-8,
                               f"violation {viol:.1e}, equality gap {gap:.1e} < 1e-8", {"violation": viol, "gap": gap}))
    ps = make_power_sum(3.0, 4.0)
    viol2, gap2 = conjugate_sweep(ps, t, w)
    out.append(CriterionResult("2b", "Young inequality on 200x200 grid, power_sum(3,4)", viol2 <= 1e-8 and gap2 < 1e-8,
                               f"violation {viol2:.1e}, equality gap {gap2:.1e} < 1e-8", {"violation": viol2, "gap": gap2}))
    closed = (2.0 / 3.0) * w**1.5
    rel = float(np.max(np.abs(conjugate(yf, w) - closed) / closed))
    out.append(CriterionResult("2c", "conjugate of t^3/3 is (2/3) w^(3/2)", rel <= 1e-8, f"max rel error {rel:.1e} <= 1e-8",
                               {"rel_error": rel}))
    return out


@_timed
def criterion_3():
    rows = []
    t0 = time.perf_counter()
    for p in (3.0, 4.0):
        yf = make_power(p)
        for s in (0.3, 0.5, 0.7):
            for x in (0.5, 1.0, 2.0):
                r = profile_truncated(yf, s, x)
                i1 = profile_I1(yf, s, x)
                i1n = profile_I1_numeric(yf, s, x)
                rows.append({"p": p, "s": s, "x": x, "extrapolated": r.extrapolated, "finest": r.value,
                             "order": r.order, "target_order": 1 - s, "I1_rel": abs(i1n - i1) / abs(i1)})
    dt = time.perf_counter() - t0
    ext = max(abs(r["extrapolated"]) for r in rows)
    i1 = max(r["I1_rel"] for r in rows)
    order_bad = [r for r in rows if not abs(r["order"] - r["target_order"]) <= 0.25 * r["target_order"]]
    worst = max(rows, key=lambda r: abs(r["order"] / r["target_order"] - 1))
    return [
        CriterionResult("3a", "1D profile: extrapolated operator vanishes", ext < 1e-3, f"max |I| {ext:.1e} < 1e-3",
                        {"rows": rows}),
        CriterionResult("3b", "1D profile: I1 closed form", i1 <= 1e-6, f"max rel {i1:.1e} <= 1e-6"),
        CriterionResult("3c", "1D profile: cutoff order within 25% of 1-s", not order_bad,
                        f"{len(order_bad)}/{len(rows)} outside; worst p={worst['p']:g} s={worst['s']:g} "
                        f"order {worst['order']:.3f} vs {worst['target_order']:.2f}",
                        {"orders": [(r["p"], r["s"], r["x"], r["order"]) for r in rows]}),
        CriterionResult("3-runtime", "1D profile runtime", dt < 120.0, f"{dt:.1f}s < 120s", {"seconds": dt}),
    ]


BUMPS = (
    ((0.0,), 0.3, 1.0, "power", 3.0, 0.5),
    ((0.2,), 0.5, 2.0, "power_sum", 3.0, 0.3),
    ((-0.1,), 0.2, 0.5, "power", 4.0, 0.7),
)


@_timed
def criterion_4(n_points: int = 100):
    rows, ok = [], True
    xs = np.linspace(-2.0, 2.0, n_points)
    for c, w, a, fam, p, s in BUMPS:
        yf = make_power(p) if fam == "power" else make_power_sum(p, p + 1)
        b = gaussian_bump(c, w, a)
        K = lieberman_bound(yf, *b.norms, 1, s)
        vals = [pointwise_apply(yf, b, [x], s) for x in xs]
        m = max(max(abs(v.extrapolated), abs(v.value)) for v in vals)
        exceed = sum(max(abs(v.extrapolated), abs(v.value)) > K for v in vals)
        ok &= exceed == 0
        rows.append({"family": yf.name, "s": s, "width": w, "amp": a, "bound": K, "max_abs": m, "exceptions": exceed})
    summ = ", ".join(f"{r['max_abs']:.3g}<={r['bound']:.3g}" for r in rows)
    return [CriterionResult("4", "pointwise operator below the C^2 ceiling", bool(ok), summ, {"rows": rows})]


def _fd_check(rng, n_states=5):
    worst = 0.0
    for yf in (make_power(3.0), make_power_sum(3.0, 4.0), make_power(2.5)):
        for dom, m in ((Interval(-1.0, 1.0), 33), (Ball((0.0, 0.0), 1.0), 16)):
            lo, h, shape = uniform_grid(dom, m)
            F = DiscreteForm(yf, 0.4, dom, lo, h, shape)
            for _ in range(n_states):
                x = rng.standard_normal(F.nfree)
                d = rng.standard_normal(F.nfree)
                g = F.modular_and_grad(x)[1]
                e = 1e-6
                fd = (F.modular(x + e * d) - F.modular(x - e * d)) / (2 * e)
                worst = max(worst, abs(g @ d - fd) / max(abs(fd), 1e-300))
    return worst


@_timed
def criterion_5(seed: int = 5):
    rng = np.random.default_rng(seed)
    out = []
    fd = _fd_check(rng)
    out.append(CriterionResult("5a", "gradient vs central differences", fd <= 1e-5, f"max rel {fd:.1e} <= 1e-5"))

    p, s, m = 3.0, 0.5, 128
    ref = DensePLaplacian1D(p, s, -1.0, 1.0, m).solve()
    prob = DirichletProblem(make_power(p), s, Interval(-1.0, 1.0), 1.0, m)
    sol = solve(prob, SolverConfig(grad_tol=1e-11, max_iters=5000))
    cross = float(np.max(np.abs(sol.u.values - ref)))
    out.append(CriterionResult("5b", "cross-implementation agreement, p=3, 128 nodes", cross <= 1e-6 and sol.converged,
                               f"sup diff {cross:.1e} <= 1e-6", {"sup_diff": cross, "sup_u": float(ref.max())}))

    cfg = SolverConfig(grad_tol=1e-9)
    worst = 0.0
    for dom, mesh in ((Interval(-1.0, 1.0), 128), (Ball((0.0, 0.0), 1.0), 24)):
        prob = DirichletProblem(make_power_sum(3.0, 4.0), 0.6, dom, 1.0, mesh)
        a = solve(prob, cfg)
        v = rng.uniform(-1, 1, a.u.shape) * (a.form.to_lattice(np.ones(a.form.nfree)).values)
        b = solve(prob, SolverConfig(grad_tol=1e-9, init=a.u.with_values(v)))
        worst = max(worst, float(np.max(np.abs(a.u.values - b.u.values))))
    out.append(CriterionResult("5c", "two-initialization uniqueness", worst <= 10 * cfg.grad_tol,
                               f"sup diff {worst:.1e} <= {10 * cfg.grad_tol:.0e}", {"sup_diff": worst}))
    return out


@_timed
def criterion_6():
    rows, ok = [], True
    cfg = SolverConfig(grad_tol=1e-9)
    for dom, mesh in ((Interval(-1.0, 1.0), 128), (Ball((0.0, 0.0), 1.0), 32)):
        for p in (3.0, 4.0):
            for s in (0.3, 0.7):
                yf = make_power(p)
                rep = check_comparison(DirichletProblem(yf, s, dom, 1.0, mesh), DirichletProblem(yf, s, dom, 2.0, mesh), cfg)
                ok &= rep.passed
                rows.append({"domain": dom.describe(), "p": p, "s": s, **rep.data, "pass": rep.passed})
    worst = max(r["max_u1_minus_u2"] - r["tolerance"] for r in rows)
    return [CriterionResult("6", "comparison principle", bool(ok), f"max(u1-u2) - tol <= {worst:.2e} over {len(rows)} cases",
                            {"rows": rows})]


@_timed
def criterion_7():
    prob, sol = torsion_solution(TORSION["coarse"])
    _, fine = torsion_solution(TORSION["fine"])
    rc = radial_profile_check(sol.u)
    pts = sol.u.nodes().reshape(-1, 2)
    inner = np.linalg.norm(pts, axis=-1) <= 0.5
    mn = float(sol.u.values.ravel()[inner].min())
    a, b = sol.u.sup_norm(), fine.u.sup_norm()
    change = abs(b - a) / b
    dt = sol.runtime + fine.runtime
    return [
        CriterionResult("7a", "torsion radial symmetry", rc["asymmetry_ok"],
                        f"max spread / tolerance {rc['max_asymmetry_over_tol']:.2f} <= 1", rc),
        CriterionResult("7b", "torsion radial monotonicity", rc["monotone_ok"], f"max rise {rc['max_rise']:.1e}"),
        CriterionResult("7c", "torsion positive on B_1/2", mn > 0, f"min {mn:.4f} > 0"),
        CriterionResult("7d", "torsion sup norm mesh-stable", change <= 0.05 and sol.converged and fine.converged,
                        f"{a:.5f} vs {b:.5f}, change {change:.2%} <= 5%", {"sup_coarse": a, "sup_fine": b}),
        CriterionResult("7-runtime", "torsion runtime", dt < 600, f"{dt:.0f}s < 600s", {"seconds": dt}, runtime=dt),
    ]


@_timed
def criterion_8():
    res = {}
    for m in (TORSION["coarse"], TORSION["fine"]):
        _, sol = torsion_solution(m)
        h = sol.u.h
        dom = Ball((0.0, 0.0), 1.0)
        sup, inf, _ = boundary_ratio_profile(sol.u, dom.signed_distance, TORSION["s"], (4 * h, 0.25))
        res[m] = (sup, inf)
    (s1, i1), (s2, i2) = res[TORSION["coarse"]], res[TORSION["fine"]]
    change = abs(s2 - s1) / s2
    ok = bool(np.isfinite(s1) and np.isfinite(s2) and change <= 0.10 and min(i1, i2) > 0)
    return [CriterionResult("8", "boundary growth u/d^s", ok,
                            f"sup {s1:.4f}/{s2:.4f} change {change:.2%} <= 10%, inf {min(i1, i2):.4f} > 0",
                            {"coarse": res[TORSION["coarse"]], "fine": res[TORSION["fine"]]})]


@_timed
def criterion_9():
    s = TORSION["s"]
    yf = make_power(TORSION["p"])
    dom = Ball((0.0, 0.0), 1.0)
    alphas = {}
    for m in (TORSION["coarse"], TORSION["fine"]):
        _, sol = torsion_solution(m)
        rep = torsion_diagnostics(sol.u, yf, s, dom)
        alphas[m] = rep["holder_alpha"]["value"]
    a = alphas[TORSION["coarse"]]
    q1 = global_holder_quotient(torsion_solution(TORSION["coarse"])[1].u, a)
    q2 = global_holder_quotient(torsion_solution(TORSION["fine"])[1].u, a)
    change = abs(q2 - q1) / q2
    return [
        CriterionResult("9a", "Hoelder exponent fit", all(0 < v <= s + 0.05 for v in alphas.values()),
                        f"alpha {alphas[TORSION['coarse']]:.3f}/{alphas[TORSION['fine']]:.3f} in (0, {s + 0.05:g}]",
                        {"alpha": alphas}),
        CriterionResult("9b", "global Hoelder quotient mesh-stable", bool(np.isfinite(q1) and change <= 0.15),
                        f"{q1:.4f} vs {q2:.4f} at alpha {a:.3f}, change {change:.1%} <= 15%", {"q": [q1, q2]}),
    ]


@_timed
def criterion_10(mesh_n: int = 40):
    prob = DirichletProblem(make_power(3.0), 0.5, Ball((0.0, 0.0), 2.0), 1.0, mesh_n)
    rep = check_scaling(prob, 2.0, SolverConfig(grad_tol=1e-9))
    d = rep.data
    return [CriterionResult("10", "scaling identity R=2", rep.passed,
                            f"discrepancy {d['discrepancy_nodes']:.1e} <= {d['tolerance']:.1e}, "
                            f"ellipticity gap {d['ellipticity_gap']:.1e} <= 1e-8", d)]


@_timed
def criterion_11(n_pairs: int = 20, seed: int = 11):
    rng = np.random.default_rng(seed)
    m = 129
    xs = np.linspace(-1.0, 1.0, m)
    h = 2.0 / (m - 1)
    yf, s = make_power(3.0), 0.5
    q = QuadratureSpec(eps_schedule=tuple(2.0 ** -np.arange(3, 9)))
    worst, rows = 0.0, []
    for _ in range(n_pairs):
        cs, ws, am = rng.uniform(-0.6, 0.6, 3), rng.uniform(0.1, 0.3, 3), rng.uniform(-1, 1, 3)
        uv = sum(a * np.exp(-((xs - c) ** 2) / (2 * w * w)) for a, c, w in zip(am, cs, ws)) * (1 - xs**2)
        u = LatticeFunction(uv, (-1.0,), h, Exterior.zero())
        x = rng.uniform(-0.5, 0.5)
        side = rng.choice([-1.0, 1.0])
        a = x + side * rng.uniform(0.15, 0.3)
        b = a + side * rng.uniform(0.1, 0.3)
        lo, hi = max(min(a, b), -1.0), min(max(a, b), 1.0)
        vv = np.where((xs > lo) & (xs < hi), rng.uniform(0.5, 2.0) * np.sin(np.pi * (xs - lo) / (hi - lo)), 0.0)
        v = LatticeFunction(vv, (-1.0,), h, Exterior.zero())
        lhs = pointwise_apply(yf, u + v, [x], s, q).value - pointwise_apply(yf, u, [x], s, q).value
        rhs = exterior_correction(yf, u, v, [x], s)
        err = abs(lhs - rhs) / max(1.0, abs(rhs))
        worst = max(worst, err)
        rows.append({"x": x, "support": [lo, hi], "difference": lhs, "correction": rhs, "rel_err": err})
    return [CriterionResult("11", "exterior-modification identity", worst <= 1e-4, f"worst rel {worst:.1e} <= 1e-4 over {n_pairs} pairs",
                            {"rows": rows})]


@_timed
def criterion_12():
    r = distance_profile_residual(make_power(3.0), Ball((0.0, 0.0), 1.0), 0.5, (0.05, 0.2), QuadratureSpec(n_theta=64),
                                  n_points=4)
    ch = r["relative_change_last_two"]
    ok = bool(np.isfinite(r["sup"]) and ch <= 0.10)
    return [CriterionResult("12", "d^s residual bounded near the boundary", ok,
                            f"sup {r['sup']:.3f}, last-two change {ch:.2%} <= 10%",
                            {k: r[k] for k in ("sup_by_cutoff", "sup", "sup_extrapolated", "relative_change_last_two")})]


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11, 12: criterion_12,
}
_BY_NAME = {str(k): f for k, f in CRITERIA.items()}


def run(keys=None, echo=None) -> list:
    """Run the selected criteria (all by default); ``echo`` receives each result line."""
    results = []
    for k in keys or sorted(CRITERIA):
        if str(k) not in _BY_NAME:
            raise ConfigurationError(f"unknown criterion {k!r}; choose from {sorted(CRITERIA)}")
        for r in _BY_NAME[str(k)]():
            results.append(r)
            if echo:
                echo(r.line())
    return results
