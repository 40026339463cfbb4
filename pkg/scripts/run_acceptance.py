"""Run acceptance criteria and write their results, with measured data, to JSON.

    python3 scripts/run_acceptance.py            # all criteria
    python3 scripts/run_acceptance.py 2 5 11     # a subset
"""
import argparse
import json
from pathlib import Path

from fglap import acceptance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("criteria", type=int, nargs="*")
    ap.add_argument("--out", type=Path, default=Path("runs/acceptance_full.json"))
    args = ap.parse_args()
    results = acceptance.run(args.criteria or None, echo=print)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps([r.to_dict() for r in results], indent=2, default=float) + "\n")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} passed")
    return 1 if n_fail else 0


if __name__ == "__main__":
    raise SystemExit(main())
