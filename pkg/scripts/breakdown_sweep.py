"""Analytic vs numeric discrepancy as the drive grows (JSON report)."""

import argparse
import json
from pathlib import Path

import numpy as np

from spinscatter import ModelParams
from spinscatter.validate import breakdown_sweep, discrepancy_is_monotone


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega-b", type=float, default=0.25)
    ap.add_argument("--omegas", type=float, nargs="+", default=list(np.round(np.linspace(0.01, 0.3, 30), 4)))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/breakdown.json"))
    args = ap.parse_args()

    reports = breakdown_sweep(args.omegas, base=ModelParams.horizontal(omega_b=args.omega_b), jobs=args.jobs)
    for w, r in zip(args.omegas, reports):
        print(f"omega={w:<7g} rel_linf={r.metrics['rel_linf']:.4g} rel_l2={r.metrics['rel_l2']:.4g} "
              f"{'pass' if r.passed else 'FAIL'}")
    body = {"omega_b": args.omega_b, "omegas": list(args.omegas),
            "monotone": discrepancy_is_monotone(reports), "reports": [r.to_dict() for r in reports]}
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(body, indent=2))
    print("->", args.out)


if __name__ == "__main__":
    main()
