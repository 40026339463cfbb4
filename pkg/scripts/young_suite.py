"""Run the inequality suite and the conjugate sweep over a list of Young functions."""
import argparse

import numpy as np

from fglap.young import check_inequality_suite, conjugate_sweep, make_power, make_power_sum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    families = [make_power(2.5), make_power(3), make_power(4), make_power_sum(3, 4), make_power_sum(2.2, 6, 0.1, 10)]
    t = np.geomspace(1e-3, 1e3, 200)
    for yf in families:
        rep = check_inequality_suite(yf, args.samples, args.seed)
        worst = max(rep.records, key=lambda r: r.max_violation)
        viol, gap = conjugate_sweep(yf, t, t)
        status = "pass" if rep.passed else "FAIL " + ",".join(rep.failures())
        print(f"{yf.name:<36} {status:<10} worst {worst.name} {worst.max_violation:+.1e}  "
              f"young {viol:+.1e} gap {gap:.1e}")


if __name__ == "__main__":
    main()
