"""Exact two-time correlations and emission spectra of the cross-polarized field.

The first-order correlation follows the quantum regression formula,
``g1(tau) = Tr{S_+^V exp(L tau)[S_-^V rho_ss]}`` (rotating frame), and the
spectrum ``S(nu) = 2 Re int_0^inf exp(-i nu tau) g1(tau) dtau`` is evaluated
through the resolvent ``(i nu - L)^-1``. Components of ``S_-^V rho_ss`` on
undamped eigenmodes of ``L`` never decay; they are split off as delta lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .errors import ConsistencyError, GridTooCoarseError, SpinScatterError
from .liouville import Liouvillian, SteadyState, expectation_row, propagate, steady_state, vec
from .model import ModelParams, standard_operators

_BATCH = 2048


@dataclass(frozen=True)
class CorrelationTrace:
    tau: np.ndarray
    values: np.ndarray
    source: str
    omega_d: float = 0.0
    frame: str = "rotating"
    meta: dict = field(default_factory=dict)
    warnings: tuple = ()

    @property
    def g1_zero(self) -> complex:
        return complex(self.values[0])


@dataclass(frozen=True)
class Spectrum:
    """Sampled spectrum on the detuning axis ``nu = omega - omega_d``.

    ``delta_lines`` holds ``(position, weight)`` pairs; a line contributes
    ``weight * delta(nu - position)``. Overall scale is arbitrary.
    """

    detuning: np.ndarray
    values: np.ndarray
    delta_lines: list = field(default_factory=list)
    source: str = "numeric"
    omega_d: float = 0.0
    frame: str = "rotating"
    meta: dict = field(default_factory=dict)
    warnings: tuple = ()

    def continuous_weight(self) -> float:
        return float(np.trapezoid(self.values, self.detuning))

    def total_weight(self) -> float:
        return self.continuous_weight() + sum(w for _, w in self.delta_lines)

    def normalized(self) -> np.ndarray:
        """Continuous part scaled to unit integral."""
        w = self.continuous_weight()
        if w == 0:
            raise ConsistencyError("spectrum has zero continuous weight")
        return self.values / w


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


@dataclass(frozen=True)
class PeakReport:
    peaks: tuple

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.position for p in self.peaks])

    def nearest(self, x: float) -> Peak:
        return min(self.peaks, key=lambda p: abs(p.position - x))

    def to_list(self) -> list:
        return [{"position": p.position, "height": p.height, "fwhm": p.fwhm} for p in self.peaks]


def _dipole_ops(basis):
    ops = standard_operators(basis)
    return ops["sm_V"].entries, ops["sp_V"].entries


def _initial_operator(lv: Liouvillian, ss: SteadyState):
    sm, sp = _dipole_ops(lv.basis)
    x0 = vec(sm @ ss.rho.entries)
    row = expectation_row(sp)
    return x0, row


def _warnings(ss: SteadyState) -> tuple:
    if ss.degenerate:
        return (f"degenerate steady state (null space dimension {ss.null_dimension}); "
                "using the long-time limit from the equal ground mixture",)
    return ()


def numeric_g1(lv: Liouvillian, tau_grid, ss: SteadyState | None = None,
               method: str = "expm") -> CorrelationTrace:
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size == 0:
        raise ValueError("tau_grid must be a non-empty 1-D array")
    if np.any(tau < 0) or np.any(np.diff(tau) <= 0):
        raise ValueError("tau_grid must be ascending and >= 0")
    ss = ss or steady_state(lv)
    x, row = _initial_operator(lv, ss)
    values = np.empty(tau.size, dtype=complex)
    steps = np.diff(tau)
    uniform = tau.size > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0)
    if uniform and method == "expm":
        step = lv.exp(steps[0])
        x = propagate(lv, x, tau[0])
        for k in range(tau.size):
            values[k] = row @ x
            x = step @ x
    else:
        for k, t in enumerate(tau):
            values[k] = row @ propagate(lv, x, t, method=method)
    g0 = row @ x if tau[0] != 0 else values[0]
    if tau[0] == 0 and abs(g0.imag) > 1e-10 * max(abs(g0), 1e-300) + 1e-15:
        raise ConsistencyError(f"g1(0) = {g0} is not real")
    return CorrelationTrace(tau, values, source="numeric", omega_d=lv.params.omega_d,
                            warnings=_warnings(ss))


def numeric_spectrum(lv: Liouvillian, detuning_grid, ss: SteadyState | None = None) -> Spectrum:
    nu = np.asarray(detuning_grid, dtype=float)
    ss = ss or steady_state(lv)
    x, row = _initial_operator(lv, ss)
    g0 = complex(row @ x)
    w, _, _ = lv.eig()
    undamped = lv.undamped_indices()
    proj_all = np.zeros_like(lv.matrix)
    delta_lines = []
    if undamped.size:
        floor = 1e-12 * max(2 * math.pi * abs(g0), 1e-300)
        for idx in lv.clusters(undamped):
            proj = lv.spectral_projector(idx)
            proj_all = proj_all + proj
            weight = 2 * math.pi * float(np.real(row @ (proj @ x)))
            if abs(weight) > floor:
                delta_lines.append((float(np.mean(w[idx].imag)), weight))
    x_perp = x - proj_all @ x

    # (i nu - L + P) acts as (i nu - L) on the damped subspace and is regular
    # on the undamped one, so every grid point is solvable.
    base = proj_all - lv.matrix
    eye = np.eye(base.shape[0])
    values = np.empty(nu.size)
    for start in range(0, nu.size, _BATCH):
        chunk = nu[start:start + _BATCH]
        mats = base[None, :, :] + 1j * chunk[:, None, None] * eye[None, :, :]
        rhs = np.broadcast_to(x_perp[:, None], (chunk.size, x_perp.size, 1))
        sol = np.linalg.solve(mats, rhs)[..., 0]
        values[start:start + chunk.size] = 2.0 * np.real(sol @ row)
    delta_lines.sort()
    return Spectrum(nu, values, delta_lines=delta_lines, source="numeric",
                    omega_d=lv.params.omega_d, meta={"g1_zero": g0.real},
                    warnings=_warnings(ss))


def spectrum_by_quadrature(trace: CorrelationTrace, constant: complex = 0.0) -> Spectrum:
    """Cross-check spectrum from a uniformly sampled ``g1`` by FFT.

    Uses the trapezoid rule for ``2 Re int_0^T exp(-i nu tau) (g1 - constant)``
    on the FFT frequency grid ``2 pi k / (n dtau)``. ``trace.tau`` must start
    at zero; the trace should have decayed by its last sample.
    """
    tau = trace.tau
    if tau[0] != 0:
        raise ValueError("quadrature requires tau starting at 0")
    dt = tau[1] - tau[0]
    if not np.allclose(np.diff(tau), dt, rtol=1e-9, atol=0):
        raise ValueError("quadrature requires a uniform tau grid")
    y = trace.values - constant
    n = y.size
    half = np.fft.fft(y) * dt - 0.5 * dt * (y[0] + y[-1] * np.exp(-2j * np.pi * np.arange(n) * (n - 1) / n))
    nu = 2 * np.pi * np.fft.fftfreq(n, d=dt)
    order = np.argsort(nu)
    return Spectrum(nu[order], 2.0 * np.real(half[order]), source="quadrature",
                    omega_d=trace.omega_d)


# -- grids -------------------------------------------------------------------

def _line_estimates(p: ModelParams):
    """Predicted line centres and half widths from the weak-excitation rates,
    or ``None`` where the closed forms do not apply."""
    from .analytic import Regime, classify_regime, effective_rates

    try:
        er = effective_rates(p)
    except SpinScatterError:
        return None
    regime = classify_regime(er)
    if regime is Regime.CRITICAL:
        return None
    hw = er.gamma_total + 2 * abs(er.omega_e.imag) + p.gamma_pd
    if regime is Regime.UNDERDAMPED:
        return [2 * er.omega_e.real, -2 * er.omega_e.real], hw
    return [0.0], hw


def default_grid(p: ModelParams, points: int = 2001) -> np.ndarray:
    """Uniform grid over ``+-max(10 gamma, 6 omega_b, 3 Gamma)``."""
    est = _line_estimates(p)
    gam = est[1] if est else 0.0
    half = max(10 * gam, 6 * p.omega_b, 3 * p.gamma)
    return np.linspace(-half, half, points)


def resolved_grid(p: ModelParams, points: int = 2001, window_points: int = 801,
                  window_halfwidths: float = 15.0) -> np.ndarray:
    """Default grid plus dense windows around the predicted narrow lines, so
    that sub-natural linewidths are sampled by many points."""
    grid = default_grid(p, points)
    est = _line_estimates(p)
    if est is None:
        return grid
    centres, hw = est
    if hw <= 0:
        return grid
    parts = [grid]
    for c in centres:
        parts.append(np.linspace(c - window_halfwidths * hw, c + window_halfwidths * hw, window_points))
    out = np.unique(np.concatenate(parts))
    return out[(out >= grid[0]) & (out <= grid[-1])]


# -- peaks -------------------------------------------------------------------

def _half_width(nu, s, k, direction):
    half = s[k] / 2.0
    j = k
    while 0 <= j + direction < s.size:
        nxt = j + direction
        if s[nxt] < half:
            x0, x1, y0, y1 = nu[j], nu[nxt], s[j], s[nxt]
            return abs(x0 + (half - y0) * (x1 - x0) / (y1 - y0) - nu[k])
        if s[nxt] > s[j]:
            return None  # ran into a neighbouring feature before half maximum
        j = nxt
    return None


def _refine(nu, s, k):
    if k == 0 or k == s.size - 1:
        return nu[k], s[k]
    x = nu[k - 1:k + 2]
    y = s[k - 1:k + 2]
    c2, c1, c0 = np.polyfit(x - x[1], y, 2)
    if c2 >= 0:
        return nu[k], s[k]
    dx = float(np.clip(-c1 / (2 * c2), x[0] - x[1], x[2] - x[1]))
    return x[1] + dx, c0 + c1 * dx + c2 * dx * dx


def peak_analysis(s: Spectrum, prominence: float = 1e-3, min_samples: int = 8) -> PeakReport:
    """Local maxima of the continuous spectrum.

    ``prominence`` is relative to the spectrum maximum. Widths are full
    widths at half of each peak's height, with linear interpolation between
    samples; a side blocked by a neighbouring feature before reaching half
    height is mirrored from the other side, and if both are blocked the
    prominence-based half width is used. Positions are refined by a
    three-point parabola.

    Raises ``GridTooCoarseError`` if any reported width spans fewer than
    ``min_samples`` grid points.
    """
    nu, vals = s.detuning, np.asarray(s.values, dtype=float)
    top = vals.max()
    if top <= 0:
        return PeakReport(())
    idx, _ = find_peaks(vals, prominence=prominence * top)
    peaks = []
    for k in idx:
        left = _half_width(nu, vals, k, -1)
        right = _half_width(nu, vals, k, +1)
        if left is not None and right is not None:
            width = left + right
        elif left is not None or right is not None:
            width = 2 * (left if left is not None else right)
        else:
            w_idx = peak_widths(vals, [k], rel_height=0.5)
            width = float(np.interp(w_idx[3][0], np.arange(nu.size), nu)
                          - np.interp(w_idx[2][0], np.arange(nu.size), nu))
        pos, height = _refine(nu, vals, k)
        inside = np.count_nonzero(np.abs(nu - pos) <= width / 2)
        if inside < min_samples:
            raise GridTooCoarseError(
                f"peak at {pos:.6g} has FWHM {width:.3g} covering {inside} samples (< {min_samples})")
        peaks.append(Peak(float(pos), float(height), float(width)))
    return PeakReport(tuple(peaks))
