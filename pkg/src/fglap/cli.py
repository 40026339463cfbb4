"""Command-line entry point.

Subcommands read a JSON config (validated with jsonschema), write JSON
records and CSV series under ``--out`` and exit with

    0  everything passed
    1  a verification failed
    2  configuration error
    3  the solver did not converge

Wall-clock timings go to stdout only, so output files depend on the config
and seed alone.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import acceptance
from .diagnostics import DiagnosticsReport, radial_profile_check, tails_side_by_side, torsion_diagnostics
from .domains import domain_from_config
from .errors import ConfigurationError, FglapError
from .lattice import gaussian_bump, load_lattice, save_lattice
from .operator import QuadratureSpec, empirical_order, profile_I1, profile_I1_numeric, profile_residual_bound, profile_truncated
from .solver import DirichletProblem, SolverConfig, solve
from .young import check_inequality_suite, conjugate_sweep, young_from_config

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NOCONV = 0, 1, 2, 3
CSV_VERSION = 1

log = logging.getLogger("fglap")

# ---------------------------------------------------------------------------
# schemas

_YOUNG = {
    "type": "object",
    "required": ["family", "params"],
    "properties": {"family": {"type": "string"}, "params": {"type": "object"}},
}
_DOMAIN = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["interval", "ball", "rectangle"]}},
}
_QUAD = {
    "type": "object",
    "properties": {
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "eps_schedule": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "R_far": {"type": "number", "exclusiveMinimum": 0},
        "far_tail_mode": {"enum": ["truncate", "analytic_bound"]},
        "assumed_order": {"type": ["number", "null"]},
        "n_theta": {"type": "integer", "minimum": 1},
        "gl_points": {"type": "integer", "minimum": 2},
    },
    "additionalProperties": False,
}
_S = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_F = {
    "oneOf": [
        {"type": "number"},
        {"type": "object", "required": ["kind", "value"],
         "properties": {"kind": {"const": "const"}, "value": {"type": "number"}}},
        {"type": "object", "required": ["kind", "id"],
         "properties": {"kind": {"const": "analytic"}, "id": {"enum": ["gaussian"]}, "params": {"type": "object"}}},
        {"type": "object", "required": ["kind", "path"],
         "properties": {"kind": {"const": "lattice-file"}, "path": {"type": "string"}}},
    ]
}
_SOLVER = {
    "type": "object",
    "properties": {
        "grad_tol": {"type": "number", "exclusiveMinimum": 0},
        "max_iters": {"type": "integer", "minimum": 0},
        "method": {"enum": ["lbfgs", "gd"]},
        "memory": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
_DIAG_SELECT = {"type": "array", "items": {"enum": ["battery", "radial", "tails"]}}

SCHEMAS = {
    "verify-young": {
        "type": "object",
        "required": ["young"],
        "properties": {
            "young": _YOUNG,
            "n_samples": {"type": "integer", "minimum": 1},
            "rtol": {"type": "number", "exclusiveMinimum": 0},
            "seed": {"type": "integer"},
            "conjugate_grid": {
                "type": "object",
                "properties": {"t_min": {"type": "number", "exclusiveMinimum": 0},
                               "t_max": {"type": "number", "exclusiveMinimum": 0},
                               "n": {"type": "integer", "minimum": 2}},
            },
            "gap_tol": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "profile": {
        "type": "object",
        "required": ["young", "s", "x"],
        "properties": {
            "young": _YOUNG,
            "s": _S,
            "x": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
            "quadrature": _QUAD,
            "tolerance": {"type": "number", "exclusiveMinimum": 0},
            "i1_rtol": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "solve": {
        "type": "object",
        "required": ["young", "s", "domain"],
        "properties": {
            "young": _YOUNG,
            "s": _S,
            "domain": _DOMAIN,
            "f": _F,
            "mesh_n": {"type": "integer", "minimum": 3},
            "n_theta": {"type": "integer", "minimum": 2},
            "solver": _SOLVER,
            "diagnostics": _DIAG_SELECT,
            "K": {"type": "number", "minimum": 0},
        },
    },
}
SCHEMAS["diagnose"] = {
    "type": "object",
    "properties": {
        "solution": {"type": "string"},
        "solve": SCHEMAS["solve"],
        "select": _DIAG_SELECT,
        "K": {"type": "number", "minimum": 0},
    },
    "anyOf": [{"required": ["solution"]}, {"required": ["solve"]}],
}
SCHEMAS["verify-all"] = {
    "type": "object",
    "properties": {"criteria": {"type": "array", "items": {"type": ["integer", "string"]}, "minItems": 1}},
}


def _validate(cmd: str, cfg: dict):
    try:
        jsonschema.validate(cfg, SCHEMAS[cmd])
    except jsonschema.ValidationError as exc:
        path = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigurationError(f"config error at {path}: {exc.message}") from None


def _dump(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# commands


def cmd_verify_young(cfg: dict, out: Path, seed: int) -> int:
    _validate("verify-young", cfg)
    yf = young_from_config(cfg["young"])
    rep = check_inequality_suite(yf, cfg.get("n_samples", 100_000), seed, cfg.get("rtol", 1e-10))
    grid = cfg.get("conjugate_grid", {})
    t = np.geomspace(grid.get("t_min", 1e-3), grid.get("t_max", 1e3), grid.get("n", 200))
    viol, gap = conjugate_sweep(yf, t, t)
    gap_tol = cfg.get("gap_tol", 1e-8)
    conj_ok = viol <= gap_tol and gap < gap_tol
    doc = rep.to_dict()
    doc["conjugate"] = {"max_violation": viol, "max_equality_gap": gap, "tolerance": gap_tol, "pass": conj_ok}
    doc["pass"] = bool(rep.passed and conj_ok)
    _dump(out / "verify_young.json", doc)
    for name in rep.failures():
        r = rep[name]
        print(f"FAIL {name}: max violation {r.max_violation:.3e} {r.detail}")
    if not conj_ok:
        print(f"FAIL conjugate: violation {viol:.3e}, equality gap {gap:.3e}")
    print(f"verify-young {yf.name}: {'pass' if doc['pass'] else 'FAIL'}")
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_profile(cfg: dict, out: Path, seed: int) -> int:
    _validate("profile", cfg)
    yf = young_from_config(cfg["young"])
    s = float(cfg["s"])
    q = QuadratureSpec.from_config(cfg.get("quadrature"))
    tol, i1_rtol = cfg.get("tolerance", 1e-3), cfg.get("i1_rtol", 1e-6)
    table, series = [], []
    ok = True
    for x in cfg["x"]:
        if max(q.eps_schedule) >= x:
            raise ConfigurationError(f"cutoffs must stay below x = {x:g}")
        r = profile_truncated(yf, s, x, q)
        bounds = [profile_residual_bound(yf, s, x, e) for e in r.eps]
        i1, i1n = profile_I1(yf, s, x), profile_I1_numeric(yf, s, x)
        rel = abs(i1n - i1) / abs(i1)
        row_ok = abs(r.extrapolated) <= tol and rel <= i1_rtol
        ok &= row_ok
        table.append({
            "x": x, "I_eps_finest": r.value, "bound_finest": bounds[-1],
            "extrapolated": r.extrapolated, "order": empirical_order(r.eps, r.values),
            "bound_order": empirical_order(r.eps, bounds), "reference_order": 1 - s,
            "I1_closed": i1, "I1_numeric": i1n, "I1_rel": rel, "pass": bool(row_ok),
        })
        series.extend(zip([x] * len(bounds), r.eps, r.values, bounds))
    _dump(out / "profile.json", {"young": yf.describe(), "s": s, "quadrature": list(q.eps_schedule), "rows": table,
                                 "tolerance": tol, "i1_rtol": i1_rtol, "pass": bool(ok), "csv_version": CSV_VERSION,
                                 "csv_columns": ["x", "eps", "I_eps", "bound"]})
    _write_csv(out / "profile.csv", ("x", "eps", "I_eps", "bound"), series)
    for row in table:
        print(f"x={row['x']:g}: I_eps={row['I_eps_finest']:.3e} extrapolated={row['extrapolated']:.3e} "
              f"order={row['order']:.3f} bound order={row['bound_order']:.3f} I1 rel={row['I1_rel']:.1e}")
    return EXIT_OK if ok else EXIT_FAIL


def _f_from_config(fc, dim):
    if fc is None:
        return 1.0
    if isinstance(fc, (int, float)):
        return float(fc)
    if fc["kind"] == "const":
        return float(fc["value"])
    if fc["kind"] == "analytic":
        params = dict(fc.get("params", {}))
        center = params.pop("center", [0.0] * dim)
        try:
            return gaussian_bump(center, **params)
        except TypeError as exc:
            raise ConfigurationError(f"bad gaussian parameters: {exc}") from exc
    path = Path(fc["path"])
    if not path.with_suffix(".json").exists():
        raise ConfigurationError(f"lattice file {path} not found")
    return load_lattice(path)


def _problem_from_config(cfg: dict) -> DirichletProblem:
    yf = young_from_config(cfg["young"])
    dom = domain_from_config(cfg["domain"])
    f = _f_from_config(cfg.get("f"), dom.dim)
    return DirichletProblem(yf, float(cfg["s"]), dom, f, cfg.get("mesh_n", 64), cfg.get("n_theta", 128))


def _run_diagnostics(u, prob_cfg, select, K, out: Path) -> bool:
    yf = young_from_config(prob_cfg["young"])
    dom = domain_from_config(prob_cfg["domain"])
    s = float(prob_cfg["s"])
    rep = DiagnosticsReport()
    if "battery" in select:
        torsion_diagnostics(u, yf, s, dom, K=K, report=rep)
    if "radial" in select and u.dim == 2 and hasattr(dom, "center"):
        rc = radial_profile_check(u, dom.center, dom.R)
        rep.add("radial_asymmetry_over_tol", rc["max_asymmetry_over_tol"], {"h": u.h}, passed=rc["asymmetry_ok"])
        rep.add("radial_max_rise", rc["max_rise"], {"h": u.h}, passed=rc["monotone_ok"])
        rep.add_series("radial_profile", zip(rc["radii"], rc["profile"]))
    if "tails" in select:
        c = getattr(dom, "center", None) or [0.5 * (dom.a + dom.b)]
        tails_side_by_side(yf, u, c, 0.5 * dom.inradius, s, rep)
    rep.write(out, "diagnostics")
    doc = json.loads((out / "diagnostics.json").read_text())
    doc["csv_version"] = CSV_VERSION
    _dump(out / "diagnostics.json", doc)
    for e in rep.entries:
        print(f"  {e['name']}: {e['value']!s:.12} {'' if e['pass'] is None else ('pass' if e['pass'] else 'FAIL')}")
    return rep.passed


def cmd_solve(cfg: dict, out: Path, seed: int) -> int:
    _validate("solve", cfg)
    prob = _problem_from_config(cfg)
    scfg = SolverConfig(**cfg.get("solver", {}))
    sol = solve(prob, scfg)
    rec = {"problem": prob.describe(), "config": cfg, "solver": sol.record(), "seed": seed,
           "csv_version": CSV_VERSION, "csv_columns": ["iteration", "energy"]}
    out.mkdir(parents=True, exist_ok=True)
    save_lattice(sol.u, out / "solution", {"problem_config": {k: cfg[k] for k in ("young", "s", "domain")},
                                           "converged": sol.converged})
    _dump(out / "run_record.json", rec)
    _write_csv(out / "energy_trace.csv", ("iteration", "energy"), enumerate(sol.energy_trace))
    print(f"solve: {sol.iterations} iterations, residual {sol.final_grad_norm:.3e}, converged={sol.converged}, "
          f"sup={sol.u.sup_norm():.6g} ({sol.runtime:.1f}s)")
    ok = True
    if cfg.get("diagnostics"):
        ok = _run_diagnostics(sol.u, cfg, cfg["diagnostics"], cfg.get("K", _default_K(prob)), out)
    if not sol.converged:
        return EXIT_NOCONV
    return EXIT_OK if ok else EXIT_FAIL


def _default_K(prob):
    f = prob.f
    return abs(float(f)) if np.isscalar(f) else 1.0


def cmd_diagnose(cfg: dict, out: Path, seed: int) -> int:
    if "solution" not in cfg and "solve" not in cfg:
        raise ConfigurationError("diagnose needs a 'solution' file or a 'solve' sub-config")
    _validate("diagnose", cfg)
    select = cfg.get("select", ["battery"])
    if "solution" in cfg:
        path = Path(cfg["solution"])
        if not path.with_suffix(".json").exists():
            raise ConfigurationError(f"solution file {path} not found")
        header = json.loads(path.with_suffix(".json").read_text())
        if "problem_config" not in header:
            raise ConfigurationError("solution file carries no problem description")
        u = load_lattice(path)
        prob_cfg = header["problem_config"]
        K = cfg.get("K", 1.0)
    else:
        code = cmd_solve(dict(cfg["solve"], diagnostics=[]), out, seed)
        if code == EXIT_NOCONV:
            return code
        u = load_lattice(out / "solution")
        prob_cfg = cfg["solve"]
        K = cfg.get("K", _default_K(_problem_from_config(prob_cfg)))
    ok = _run_diagnostics(u, prob_cfg, select, K, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_all(cfg: dict, out: Path, seed: int) -> int:
    _validate("verify-all", cfg)
    keys = cfg.get("criteria")
    results = acceptance.run(keys, echo=print)
    doc = [{k: v for k, v in r.to_dict().items() if k not in ("runtime", "data")} for r in results]
    _dump(out / "acceptance.json", {"results": doc, "pass": all(r.passed for r in results)})
    n_fail = sum(not r.passed for r in results)
    print(f"verify-all: {len(results) - n_fail}/{len(results)} passed")
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


COMMANDS = {
    "verify-young": cmd_verify_young,
    "profile": cmd_profile,
    "solve": cmd_solve,
    "diagnose": cmd_diagnose,
    "verify-all": cmd_verify_all,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="fglap", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="JSON config (optional for verify-all)")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config's seed")
    ap.add_argument("--threads", type=int, default=None, help="numba worker threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.threads is not None:
            import warnings

            import numba

            warnings.filterwarnings("ignore", message=".*TBB.*")
            if not 1 <= args.threads <= numba.config.NUMBA_NUM_THREADS:
                raise ConfigurationError(f"--threads must lie in [1, {numba.config.NUMBA_NUM_THREADS}]")
            numba.set_num_threads(args.threads)
        cfg = {}
        if args.config is not None:
            try:
                cfg = json.loads(args.config.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"cannot read config: {exc}") from exc
        elif args.command != "verify-all":
            raise ConfigurationError(f"{args.command} needs --config")
        if not isinstance(cfg, dict):
            raise ConfigurationError("config must be a JSON object")
        cfg = copy.deepcopy(cfg)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        return COMMANDS[args.command](cfg, args.out, seed)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FglapError as exc:
        # bad parameter values (p <= 2, s outside (0,1), ...) are configuration problems too
        if isinstance(exc, ValueError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
