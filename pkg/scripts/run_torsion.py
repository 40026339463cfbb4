"""Torsion problem on the unit disc: solve on several meshes and run the diagnostic battery.

    python3 scripts/run_torsion.py --meshes 32 48 64 --out runs/torsion
"""
import argparse
import json
from pathlib import Path

from fglap.diagnostics import radial_profile_check, torsion_diagnostics
from fglap.domains import Ball
from fglap.lattice import save_lattice
from fglap.solver import DirichletProblem, SolverConfig, solve
from fglap.young import make_power, make_power_sum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--meshes", type=int, nargs="+", default=[32, 48, 64])
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--family", choices=["power", "power_sum"], default="power")
    ap.add_argument("--grad-tol", type=float, default=1e-8)
    ap.add_argument("--out", type=Path, default=Path("runs/torsion"))
    args = ap.parse_args()

    yf = make_power(3) if args.family == "power" else make_power_sum(3, 4)
    dom = Ball((0.0, 0.0), 1.0)
    summary = []
    for m in args.meshes:
        sol = solve(DirichletProblem(yf, args.s, dom, 1.0, m), SolverConfig(grad_tol=args.grad_tol))
        out = args.out / f"mesh{m}"
        out.mkdir(parents=True, exist_ok=True)
        save_lattice(sol.u, out / "solution")
        rep = torsion_diagnostics(sol.u, yf, args.s, dom)
        rc = radial_profile_check(sol.u)
        rep.add("radial_asymmetry_over_tol", rc["max_asymmetry_over_tol"], {"h": sol.u.h}, passed=rc["asymmetry_ok"])
        rep.write(out)
        row = {"mesh": m, "iterations": sol.iterations, "runtime": round(sol.runtime, 2), "sup": sol.u.sup_norm(),
               **{e["name"]: e["value"] for e in rep.entries if isinstance(e["value"], float)}}
        summary.append(row)
        print(json.dumps(row))
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
