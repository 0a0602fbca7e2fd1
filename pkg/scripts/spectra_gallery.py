"""Emission spectra for the weak-drive splitting, weak-drive broadening and
strong-drive dephasing series. Writes one CSV per series."""

import argparse
import csv
from pathlib import Path

import numpy as np

from spinscatter import ModelParams, analytic_spectrum, build_liouvillian, numeric_spectrum, peak_analysis
from spinscatter.correlation import resolved_grid

SERIES = {
    "splitting": [ModelParams.horizontal(omega=0.05, omega_b=b) for b in (0.5, 1.0, 2.0)],
    "broadening": [ModelParams.horizontal(omega=w, omega_b=0.25) for w in (0.02, 0.05, 0.1)],
    "dephasing": [ModelParams.horizontal(omega=1.5, omega_b=2.0, gamma_pd=g) for g in (0.0, 0.1, 0.3)],
}


def write_series(name, points, out):
    nu = np.unique(np.concatenate([resolved_grid(p) for p in points]))
    cols, labels = [nu], ["detuning"]
    for p in points:
        s = numeric_spectrum(build_liouvillian(p), nu)
        tag = f"omega={p.omega:g},omega_b={p.omega_b:g},gamma_pd={p.gamma_pd:g}"
        cols.append(s.values)
        labels.append("numeric[" + tag + "]")
        if p.omega < 0.5:
            cols.append(analytic_spectrum(p, nu).values)
            labels.append("analytic[" + tag + "]")
        peaks = ", ".join(f"{q.position:+.4f} (fwhm {q.fwhm:.4f})" for q in peak_analysis(s))
        print(f"{name} {tag}: {peaks}")
    path = out / f"{name}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(labels)
        w.writerows(zip(*cols))
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/spectra"))
    ap.add_argument("series", nargs="*", help=f"any of {sorted(SERIES)} (default: all)")
    args = ap.parse_args()
    unknown = set(args.series) - set(SERIES)
    if unknown:
        ap.error(f"unknown series: {sorted(unknown)}")
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.series or sorted(SERIES):
        print("->", write_series(name, SERIES[name], args.out))


if __name__ == "__main__":
    main()
