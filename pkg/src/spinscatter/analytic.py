"""Closed-form weak-excitation results.

Adiabatic elimination of the trions leaves a ground-state spin with a light
shifted Zeeman energy ``omega_b_tilde`` and two drive-induced jump operators
with complex amplitudes ``gamma_minus``/``gamma_plus``. The transverse Bloch
components then perform damped precession at ``2 omega_e`` with damping
``gamma``, and the cross-polarized correlation function is a sum of two
complex exponentials with amplitudes ``s_plus``/``s_minus``.

All outputs live in the frame rotating at the laser frequency.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CriticalDampingError, InvalidParameterError, SingularParameterError
from .model import ModelParams

CRIT_TOL = 1e-9


class Regime(str, enum.Enum):
    UNDERDAMPED = "Underdamped"
    OVERDAMPED = "Overdamped"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class EffectiveRates:
    """Bundle of weak-excitation rates for one parameter point.

    ``r_decomp`` and ``i_decomp`` are defined through
    ``gamma_minus * conj(gamma_plus) = R/2 + i I/2``. With this ordering the
    transverse Bloch equations read
    ``d/dt (r_x, r_y) = [[R - gamma_sigma, -(2 w~ - I)], [2 w~, -gamma_sigma]] (r_x, r_y)``,
    which is what the effective master equation produces for
    ``rho_{+-} = r_x - i r_y``.
    """

    omega_b_tilde: float
    gamma_minus: complex
    gamma_plus: complex
    gamma_sigma: float
    r_decomp: float
    i_decomp: float
    gamma_total: float
    omega_e: complex
    v_plus: complex
    v_minus: complex
    gamma: float = 1.0

    @property
    def radicand(self) -> float:
        """Real number whose principal square root is ``omega_e``."""
        w = self.omega_b_tilde
        return w * (w - self.i_decomp / 2.0) - (self.r_decomp / 4.0) ** 2

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        return (-self.gamma_total + 2j * self.omega_e, -self.gamma_total - 2j * self.omega_e)

    def bloch_matrix(self) -> np.ndarray:
        w, r, i, gs = self.omega_b_tilde, self.r_decomp, self.i_decomp, self.gamma_sigma
        return np.array([[r - gs, -(2.0 * w - i)], [2.0 * w, -gs]])

    def to_dict(self) -> dict:
        def cplx(z):
            return {"re": float(z.real), "im": float(z.imag)}

        return {
            "omega_b_tilde": self.omega_b_tilde,
            "gamma_minus": cplx(self.gamma_minus),
            "gamma_plus": cplx(self.gamma_plus),
            "gamma_sigma": self.gamma_sigma,
            "R": self.r_decomp,
            "I": self.i_decomp,
            "gamma_total": self.gamma_total,
            "omega_e": cplx(self.omega_e),
            "v_plus": cplx(self.v_plus),
            "v_minus": cplx(self.v_minus),
        }


def _principal_sqrt(x: float) -> complex:
    # Real >= 0 for x >= 0, +i sqrt(|x|) otherwise.
    return complex(math.sqrt(x)) if x >= 0 else 1j * math.sqrt(-x)


def effective_rates(p: ModelParams) -> EffectiveRates:
    p.require_decay()
    w = p.omega
    g, d, wb = p.gamma, p.delta, p.omega_b
    amp = w * math.sqrt(g / 2.0)
    gm = amp / (d - wb - 0.5j * g)
    gp = amp / (d + wb - 0.5j * g)
    w_tilde = wb + 0.5 * (
        w**2 * (wb - d) / ((wb - d) ** 2 + (g / 2.0) ** 2)
        + w**2 * (wb + d) / ((wb + d) ** 2 + (g / 2.0) ** 2)
    )
    gamma_sigma = abs(gp) ** 2 + abs(gm) ** 2
    cross = gm * gp.conjugate()
    r = 2.0 * cross.real
    i = 2.0 * cross.imag
    gamma_total = gamma_sigma - r / 2.0
    omega_e = _principal_sqrt(w_tilde * (w_tilde - i / 2.0) - (r / 4.0) ** 2)
    num = 2.0 * (w_tilde - i / 2.0)
    den_p = r / 2.0 - 2j * omega_e
    den_m = r / 2.0 + 2j * omega_e
    v_plus = num / den_p if den_p != 0 else complex("nan")
    v_minus = num / den_m if den_m != 0 else complex("nan")
    return EffectiveRates(
        omega_b_tilde=w_tilde, gamma_minus=gm, gamma_plus=gp, gamma_sigma=gamma_sigma,
        r_decomp=r, i_decomp=i, gamma_total=gamma_total, omega_e=omega_e,
        v_plus=v_plus, v_minus=v_minus, gamma=g,
    )


def classify_regime(er: EffectiveRates, crit_tol: float = CRIT_TOL) -> Regime:
    if abs(er.omega_e) <= crit_tol * er.gamma:
        return Regime.CRITICAL
    if er.omega_e.imag == 0:
        return Regime.UNDERDAMPED
    return Regime.OVERDAMPED


@dataclass(frozen=True)
class BlochSolution:
    c_plus: complex
    c_minus: complex
    rates: EffectiveRates

    def __call__(self, t):
        er = self.rates
        t = np.asarray(t, dtype=float)
        lam_p, lam_m = er.eigenvalues
        up = self.c_plus * np.exp(lam_p * t)
        dn = self.c_minus * np.exp(lam_m * t)
        return (up * er.v_plus + dn * er.v_minus).real, (up + dn).real


def bloch_solution(er: EffectiveRates, r0) -> BlochSolution:
    if classify_regime(er) is Regime.CRITICAL or er.v_plus == er.v_minus:
        raise CriticalDampingError("omega_e = 0: eigenvectors coincide; use the numerical path")
    rx0, ry0 = (r0.r_x, r0.r_y) if hasattr(r0, "r_x") else r0
    m = np.array([[er.v_plus, er.v_minus], [1.0, 1.0]], dtype=complex)
    c = np.linalg.solve(m, np.array([rx0, ry0], dtype=complex))
    return BlochSolution(complex(c[0]), complex(c[1]), er)


def bloch_evolve(er: EffectiveRates, r0, t):
    """Transverse Bloch components ``(r_x(t), r_y(t))`` from ``r0``.

    ``r0`` is a ``BlochVector`` or an ``(r_x, r_y)`` pair.
    """
    if np.any(np.asarray(t) < 0):
        raise InvalidParameterError("t must be >= 0")
    return bloch_solution(er, r0)(t)


# -- correlation coefficients -------------------------------------------------

@dataclass(frozen=True)
class SpectralCoefficients:
    s_plus: complex
    s_minus: complex
    alpha_plus: complex
    alpha_minus: complex
    n_norm: float
    rates: EffectiveRates = field(repr=False)

    @property
    def g1_zero(self) -> complex:
        return self.s_plus + self.s_minus


def _norm_factor(p: ModelParams) -> float:
    w = p.omega
    return p.gamma**2 + 4 * p.delta**2 + 4 * p.omega_b**2 + 8 * w**2


def spectral_coefficients(p: ModelParams) -> SpectralCoefficients:
    if p.omega_b == 0:
        raise SingularParameterError("omega_b = 0: use tls_limit_g1")
    er = effective_rates(p)
    if classify_regime(er) is Regime.CRITICAL:
        raise CriticalDampingError("omega_e = 0: closed form undefined; use the numerical path")
    w, g, d, wb = p.omega, p.gamma, p.delta, p.omega_b
    n = _norm_factor(p)
    base = g / 2.0 - 1j * d - er.gamma_total
    a_p = base + 2j * er.omega_e
    a_m = base - 2j * er.omega_e
    vp, vm = er.v_plus, er.v_minus
    pref = 2.0 * w**2 / n
    den_p = (vm - vp) * (a_p**2 + wb**2)
    den_m = (vp - vm) * (a_m**2 + wb**2)
    if den_p == 0 or den_m == 0:
        raise SingularParameterError("alpha^2 + omega_b^2 vanishes")
    s_p = pref * (vm * wb + 1j * d - g / 2.0) * (vp * a_p - wb) / den_p
    s_m = pref * (vp * wb + 1j * d - g / 2.0) * (vm * a_m - wb) / den_m
    return SpectralCoefficients(complex(s_p), complex(s_m), complex(a_p), complex(a_m), n, er)


def tls_limit_g1(p: ModelParams) -> complex:
    """Constant correlation ``2 Omega^2 / N`` of the zero-field (two-level) limit."""
    if p.omega_b != 0:
        raise InvalidParameterError("tls_limit_g1 requires omega_b = 0")
    p.require_decay()
    return complex(2.0 * p.omega**2 / _norm_factor(p))


def analytic_g1(p: ModelParams, tau_grid):
    from .correlation import CorrelationTrace

    tau = np.asarray(tau_grid, dtype=float)
    if p.omega_b == 0:
        values = np.full(tau.shape, tls_limit_g1(p), dtype=complex)
        return CorrelationTrace(tau, values, source="analytic", omega_d=p.omega_d,
                                meta={"special_case": "tls_limit"})
    sc = spectral_coefficients(p)
    er = sc.rates
    values = (sc.s_plus * np.exp((2j * er.omega_e - er.gamma_total) * tau)
              + sc.s_minus * np.exp((-2j * er.omega_e - er.gamma_total) * tau))
    return CorrelationTrace(tau, values, source="analytic", omega_d=p.omega_d,
                            meta={"regime": classify_regime(er).value})


def line_shape(sc: SpectralCoefficients, nu):
    er = sc.rates
    nu = np.asarray(nu, dtype=float)
    return 2.0 * np.real(sc.s_plus / (1j * (nu - 2 * er.omega_e) + er.gamma_total)
                         + sc.s_minus / (1j * (nu + 2 * er.omega_e) + er.gamma_total))


def analytic_spectrum(p: ModelParams, omega_grid):
    """Two-line weak-excitation spectrum on the detuning grid ``omega - omega_d``.

    ``meta`` carries the closed-form line centres and half widths: at
    ``+-2 omega_e`` with half width ``gamma`` when underdamped, both at zero
    with half widths ``gamma +- 2|omega_e|`` when overdamped.
    """
    from .correlation import Spectrum

    nu = np.asarray(omega_grid, dtype=float)
    sc = spectral_coefficients(p)
    er = sc.rates
    regime = classify_regime(er)
    if regime is Regime.UNDERDAMPED:
        centres = [2 * er.omega_e.real, -2 * er.omega_e.real]
        widths = [er.gamma_total, er.gamma_total]
    else:
        centres = [0.0, 0.0]
        widths = [er.gamma_total + 2 * abs(er.omega_e), er.gamma_total - 2 * abs(er.omega_e)]
    meta = {"regime": regime.value, "line_centres": centres, "half_widths": widths,
            "total_weight": float(2 * math.pi * (sc.s_plus + sc.s_minus).real)}
    return Spectrum(nu, line_shape(sc, nu), delta_lines=[], source="analytic",
                    omega_d=p.omega_d, meta=meta)


def tls_limit_spectrum(p: ModelParams, omega_grid):
    """Zero-field spectrum: a single delta line at the laser frequency."""
    from .correlation import Spectrum

    nu = np.asarray(omega_grid, dtype=float)
    weight = 2 * math.pi * tls_limit_g1(p).real
    return Spectrum(nu, np.zeros_like(nu), delta_lines=[(0.0, weight)], source="analytic",
                    omega_d=p.omega_d, meta={"special_case": "tls_limit"})

