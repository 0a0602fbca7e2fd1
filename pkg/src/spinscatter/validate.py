"""Quantified comparisons between the weak-excitation formulas and the exact
master equation, plus the small fitting tools used to read damping behaviour
off correlation traces."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .analytic import analytic_spectrum
from .correlation import CorrelationTrace, PeakReport, Spectrum, numeric_spectrum, peak_analysis, resolved_grid
from .errors import GridTooCoarseError, InvalidParameterError, SingularParameterError
from .liouville import build_liouvillian
from .model import ModelParams

DEFAULT_BREAKDOWN_OMEGAS = (0.05, 0.1, 0.15)


@dataclass(frozen=True)
class Tolerances:
    """Pass thresholds; ``None`` disables a metric. The 5% L-inf default is a
    chosen threshold, not a derived number."""

    rel_linf: float | None = 0.05
    rel_l2: float | None = None
    peak_position: float | None = None
    fwhm: float | None = None


@dataclass(frozen=True)
class ComparisonReport:
    params: dict
    metrics: dict
    passed: bool
    tolerances: Tolerances = field(default_factory=Tolerances)
    analytic_peaks: tuple = ()
    numeric_peaks: tuple = ()
    delta_lines: tuple = ()

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "metrics": self.metrics,
            "passed": self.passed,
            "tolerances": {k: getattr(self.tolerances, k) for k in ("rel_linf", "rel_l2", "peak_position", "fwhm")},
            "peaks": {"analytic": list(self.analytic_peaks), "numeric": list(self.numeric_peaks)},
            "delta_lines": [list(d) for d in self.delta_lines],
        }


def _safe_peaks(s: Spectrum) -> PeakReport | None:
    try:
        return peak_analysis(s)
    except GridTooCoarseError:
        return None


def _peak_deltas(pa: PeakReport | None, pn: PeakReport | None):
    if pa is None or pn is None or len(pa) != len(pn) or len(pa) == 0:
        return None, None
    a = sorted(pa, key=lambda q: q.position)
    n = sorted(pn, key=lambda q: q.position)
    dpos = max(abs(x.position - y.position) for x, y in zip(a, n))
    dfw = max(abs(x.fwhm - y.fwhm) / x.fwhm for x, y in zip(a, n))
    return float(dpos), float(dfw)


def spectrum_metrics(analytic: Spectrum, numeric: Spectrum) -> dict:
    """Discrepancy between integral-normalized spectra on a shared grid."""
    if analytic.detuning.shape != numeric.detuning.shape or np.any(analytic.detuning != numeric.detuning):
        raise InvalidParameterError("spectra must share a grid")
    a = analytic.normalized()
    n = numeric.normalized()
    diff = a - n
    nu = analytic.detuning
    linf = float(np.max(np.abs(diff)) / np.max(np.abs(a)))
    l2 = float(math.sqrt(np.trapezoid(diff**2, nu) / np.trapezoid(a**2, nu)))
    dpos, dfw = _peak_deltas(_safe_peaks(analytic), _safe_peaks(numeric))
    return {"rel_linf": linf, "rel_l2": l2, "peak_position_delta": dpos, "fwhm_rel_delta": dfw}


def _passes(metrics: dict, tol: Tolerances) -> bool:
    checks = [("rel_linf", tol.rel_linf), ("rel_l2", tol.rel_l2),
              ("peak_position_delta", tol.peak_position), ("fwhm_rel_delta", tol.fwhm)]
    for key, limit in checks:
        if limit is None:
            continue
        value = metrics.get(key)
        if value is None or value > limit:
            return False
    return True


def compare_spectra(p: ModelParams, grid=None, tolerances: Tolerances = Tolerances()) -> ComparisonReport:
    if p.omega_b == 0:
        raise SingularParameterError("compare_spectra needs omega_b != 0 for the analytic path")
    nu = resolved_grid(p) if grid is None else np.asarray(grid, dtype=float)
    sa = analytic_spectrum(p, nu)
    sn = numeric_spectrum(build_liouvillian(p), nu)
    metrics = spectrum_metrics(sa, sn)
    pa, pn = _safe_peaks(sa), _safe_peaks(sn)
    return ComparisonReport(
        params=p.to_dict(), metrics=metrics, passed=_passes(metrics, tolerances), tolerances=tolerances,
        analytic_peaks=tuple(pa.to_list()) if pa else (),
        numeric_peaks=tuple(pn.to_list()) if pn else (),
        delta_lines=tuple(sn.delta_lines),
    )


def breakdown_sweep(omegas, base: ModelParams | None = None, grid=None,
                    tolerances: Tolerances = Tolerances(), jobs: int = 1) -> list[ComparisonReport]:
    """``compare_spectra`` over drive strengths; other parameters from ``base``
    (default: resonant, ``omega_b = 0.25``)."""
    base = base or ModelParams.horizontal(omega_b=0.25)
    points = [base.with_(omega=float(w)) for w in omegas]
    if jobs > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(lambda q: compare_spectra(q, grid, tolerances), points))
    return [compare_spectra(q, grid, tolerances) for q in points]


def discrepancy_is_monotone(reports, metric: str = "rel_linf", strict: bool = True) -> bool:
    vals = [r.metrics[metric] for r in reports]
    pairs = list(zip(vals[:-1], vals[1:]))
    return all(b > a for a, b in pairs) if strict else all(b >= a for a, b in pairs)


# -- four-peak regime --------------------------------------------------------

@dataclass(frozen=True)
class FourPeakWidths:
    gamma_pd: float
    inner_fwhm: float
    outer_fwhm: float
    inner_positions: tuple
    outer_positions: tuple


def split_four_peaks(report: PeakReport):
    """Return ``(inner, outer)`` pairs of a symmetric four-peak spectrum."""
    if len(report) != 4:
        raise InvalidParameterError(f"expected four peaks, found {len(report)}")
    ordered = sorted(report, key=lambda q: abs(q.position))
    return ordered[:2], ordered[2:]


def dephasing_sweep(p: ModelParams, gamma_pds=(0.0, 0.1, 0.3), grid=None) -> list[FourPeakWidths]:
    """Inner and outer linewidths of the strong-drive spectrum versus ground
    state dephasing."""
    out = []
    for gpd in gamma_pds:
        q = p.with_(gamma_pd=float(gpd))
        nu = resolved_grid(q) if grid is None else np.asarray(grid, dtype=float)
        inner, outer = split_four_peaks(peak_analysis(numeric_spectrum(build_liouvillian(q), nu)))
        out.append(FourPeakWidths(
            float(gpd),
            float(np.mean([k.fwhm for k in inner])),
            float(np.mean([k.fwhm for k in outer])),
            tuple(sorted(k.position for k in inner)),
            tuple(sorted(k.position for k in outer)),
        ))
    return out


# -- time-domain readouts ----------------------------------------------------

def extrema_times(trace: CorrelationTrace, kind: str = "max", t_min: float = 0.0) -> np.ndarray:
    """Parabola-refined times of local extrema of ``|g1|``."""
    y = np.abs(trace.values)
    t = trace.tau
    idx, _ = find_peaks(y if kind == "max" else -y)
    res = []
    for k in idx:
        if t[k] < t_min:
            continue
        y0, y1, y2 = y[k - 1:k + 2]
        den = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        res.append(t[k] + shift * (t[k + 1] - t[k]))
    return np.array(res)


def zero_crossing_frequency(tau, y) -> float:
    """Angular frequency from the mean spacing of sign changes of ``y``."""
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    k = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    if k.size < 2:
        raise InvalidParameterError("fewer than two zero crossings")
    roots = tau[k] - y[k] * (tau[k + 1] - tau[k]) / (y[k + 1] - y[k])
    return float(math.pi / np.mean(np.diff(roots)))


def fit_two_exponentials(tau, y) -> tuple[float, float]:
    """Decay rates of ``y = a exp(-r1 t) + b exp(-r2 t)`` by Prony's method.

    Requires uniform sampling; returns the rates in ascending order.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y)
    dt = tau[1] - tau[0]
    if not np.allclose(np.diff(tau), dt, rtol=1e-9, atol=0):
        raise InvalidParameterError("Prony fit needs a uniform grid")
    a = np.column_stack([y[1:-1], y[:-2]])
    coef, *_ = np.linalg.lstsq(a, y[2:], rcond=None)
    roots = np.roots([1.0, -coef[0], -coef[1]])
    rates = np.sort(-np.log(roots.astype(complex)).real / dt)
    return float(rates[0]), float(rates[1])
