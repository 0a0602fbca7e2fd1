"""g1(tau) in the under- and overdamped regimes, analytic and numeric.

    python scripts/damping_regimes.py --out results/damping
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from spinscatter import ModelParams, analytic_g1, build_liouvillian, classify_regime, effective_rates, numeric_g1

CASES = {
    "underdamped": ModelParams.horizontal(omega=0.05, omega_b=0.25),
    "overdamped": ModelParams.horizontal(omega=0.05, omega_b=0.0015),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/damping"))
    ap.add_argument("--points", type=int, default=4001)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name, p in CASES.items():
        er = effective_rates(p)
        slow = er.gamma_total - 2 * abs(er.omega_e.imag)
        tau = np.linspace(0, 8 / slow, args.points)
        a = analytic_g1(p, tau).values
        n = numeric_g1(build_liouvillian(p), tau).values
        path = args.out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau", "abs_g1_analytic", "abs_g1_numeric", "re_g1_analytic", "re_g1_numeric"])
            w.writerows(zip(tau, np.abs(a), np.abs(n), a.real, n.real))
        print(f"{name}: regime={classify_regime(er).value} omega_e={er.omega_e:.6g} "
              f"gamma={er.gamma_total:.6g} -> {path}")


if __name__ == "__main__":
    main()
