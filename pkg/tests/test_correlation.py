import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import faraday_model, fft_spectrum
from spinscatter.analytic import analytic_g1, analytic_spectrum, effective_rates, tls_limit_g1
from spinscatter.correlation import (Spectrum, default_grid, numeric_g1, numeric_spectrum, peak_analysis,
                                     resolved_grid, spectrum_by_quadrature)
from spinscatter.errors import GridTooCoarseError
from spinscatter.liouville import build_liouvillian, steady_state
from spinscatter.model import ModelParams, standard_operators
from spinscatter.validate import split_four_peaks, zero_crossing_frequency

drives = st.builds(ModelParams.horizontal, delta=st.floats(-1, 1), omega_b=st.floats(0, 2),
                   omega=st.just(0.0) | st.floats(1e-3, 1.5), gamma_pd=st.floats(0, 0.3))


def test_zero_delay_is_excited_occupation():
    p = ModelParams.horizontal(omega=0.4, omega_b=0.6, delta=0.2)
    lv = build_liouvillian(p)
    tr = numeric_g1(lv, [0.0, 1.0])
    v = standard_operators()
    rho = steady_state(lv).rho
    assert tr.values[0] == pytest.approx(rho.expect(v["sp_V"] @ v["sm_V"]), abs=1e-15)
    # (<-|rho'|P> + <+|rho'|M>) / sqrt2 with rho' = S_-^V rho
    rp = v["sm_V"].entries @ rho.entries
    plus, P, minus, M = 0, 1, 2, 3
    assert tr.values[0] == pytest.approx((rp[minus, P] + rp[plus, M]) / math.sqrt(2), abs=1e-15)


@given(drives)
@settings(max_examples=30)
def test_trace_invariants(p):
    tau = np.linspace(0, 30, 301)
    tr = numeric_g1(build_liouvillian(p), tau)
    g0 = tr.values[0]
    assert abs(g0.imag) <= 1e-10 and g0.real >= -1e-10
    assert np.all(np.abs(tr.values) <= g0.real + 1e-8)
    assert tr.frame == "rotating" and tr.omega_d == p.omega_d


def test_undriven_trace_vanishes():
    tr = numeric_g1(build_liouvillian(ModelParams.horizontal(omega_b=0.5)), np.linspace(0, 10, 11))
    # exact zero up to roundoff in the projected steady state
    assert np.max(np.abs(tr.values)) < 1e-15
    assert tr.warnings and "degenerate" in tr.warnings[0]


def test_tau_grid_must_be_ascending_nonnegative():
    lv = build_liouvillian(ModelParams.horizontal(omega=0.1))
    for bad in ([1.0, 0.5], [-1.0, 0.0], []):
        with pytest.raises(ValueError):
            numeric_g1(lv, bad)


def test_nonuniform_grid_matches_stepping():
    lv = build_liouvillian(ModelParams.horizontal(omega=0.3, omega_b=0.4))
    t = np.linspace(0, 20, 201)
    a = numeric_g1(lv, t)
    pick = np.sort(np.random.default_rng(4).choice(t.size, 40, replace=False))
    b = numeric_g1(lv, t[pick])
    c = numeric_g1(lv, t[pick], method="ode")
    assert np.allclose(a.values[pick], b.values, atol=1e-12)
    assert np.allclose(b.values, c.values, atol=1e-10)


def test_oscillation_frequency_from_zero_crossings():
    p = ModelParams.horizontal(omega=0.05, omega_b=1.0)
    tau = np.linspace(0, 200, 40001)
    tr = numeric_g1(build_liouvillian(p), tau)
    freq = zero_crossing_frequency(tau[tau > 5], tr.values.real[tau > 5])
    assert freq == pytest.approx(2 * effective_rates(p).omega_e.real, rel=0.01)


# -- spectra -----------------------------------------------------------------

def test_zero_field_spectrum_is_a_delta_line():
    p = ModelParams.horizontal(omega=0.05)
    s = numeric_spectrum(build_liouvillian(p), default_grid(p))
    assert len(s.delta_lines) == 1
    pos, weight = s.delta_lines[0]
    assert abs(pos) < 1e-10
    assert weight == pytest.approx(2 * math.pi * tls_limit_g1(p).real, rel=0.02)
    assert s.values.max() < 0.05 * weight


def test_four_peaks_at_strong_drive():
    p = ModelParams.horizontal(omega=1.5, omega_b=2.0)
    inner, outer = split_four_peaks(peak_analysis(numeric_spectrum(build_liouvillian(p), default_grid(p))))
    for q in inner:
        assert abs(abs(q.position) - 2.0) < 0.1 * 2.0
    assert all(abs(q.position) > 4.0 for q in outer)


@pytest.mark.parametrize("kw", [
    dict(omega=0.6, omega_b=0.8, delta=0.3, gamma_pd=0.1),
    dict(omega=1.2, omega_b=0.3, delta=-0.5),
])
def test_resolvent_matches_time_domain_quadrature(kw):
    p = ModelParams.horizontal(**kw)
    lv = build_liouvillian(p)
    slow = min(-lv.eig()[0].real[np.abs(lv.eig()[0]) > 1e-8])
    dt = 0.02
    nu, ref = fft_spectrum(*faraday_model(1.0, p.delta, p.omega_b, p.omega, p.omega, p.gamma_pd),
                           dt, int(40 / slow / dt))
    window = np.abs(nu) < 8
    s = numeric_spectrum(lv, nu[window])
    assert np.max(np.abs(s.values - ref[window])) <= 0.01 * np.max(np.abs(s.values))


def test_package_quadrature_matches_closed_form():
    p = ModelParams.horizontal(omega=0.05, omega_b=0.5)
    er = effective_rates(p)
    dt = 0.05
    tau = np.arange(0, 40 / er.gamma_total, dt)
    s = spectrum_by_quadrature(analytic_g1(p, tau))
    a = analytic_spectrum(p, s.detuning)
    assert np.max(np.abs(s.values - a.values)) <= 0.01 * a.values.max()


@pytest.mark.parametrize("kw", [
    dict(omega=0.05, omega_b=0.25), dict(omega=0.3, omega_b=1.0, delta=0.4), dict(omega=1.0, omega_b=0.5),
])
def test_sum_rule(kw):
    p = ModelParams.horizontal(**kw)
    lv = build_liouvillian(p)
    er = effective_rates(p)
    nu = np.unique(np.concatenate([resolved_grid(p), np.linspace(-200, 200, 40001)]))
    s = numeric_spectrum(lv, nu)
    assert nu[-1] - nu[0] >= 20 * 2 * max(er.gamma_total, 1.0)
    assert s.total_weight() == pytest.approx(2 * math.pi * s.meta["g1_zero"], rel=0.01)


@given(drives)
@settings(max_examples=25)
def test_spectrum_nonnegative_and_delta_weights(p):
    s = numeric_spectrum(build_liouvillian(p), np.linspace(-6, 6, 601))
    # absolute floor covers the undriven case, where S vanishes up to roundoff
    assert s.values.min() >= -1e-8 * s.values.max() - 1e-15
    assert all(w >= -1e-12 for _, w in s.delta_lines)


@pytest.mark.parametrize("omega_b", [0.1, 0.25, 0.5, 1.0])
def test_weak_excitation_agreement(omega_b):
    p = ModelParams.horizontal(omega=0.05, omega_b=omega_b)
    nu = resolved_grid(p)
    a = analytic_spectrum(p, nu).normalized()
    n = numeric_spectrum(build_liouvillian(p), nu).normalized()
    assert np.max(np.abs(a - n)) <= 0.05 * a.max()


def local_step(nu, x):
    k = np.searchsorted(nu, x)
    return max(nu[k] - nu[k - 1], nu[k + 1] - nu[k])


@pytest.mark.parametrize("omega_b", [0.5, 0.8, 1.2, 2.0])
def test_splitting_within_one_grid_step(omega_b):
    p = ModelParams.horizontal(omega=0.05, omega_b=omega_b)
    er = effective_rates(p)
    nu = resolved_grid(p)
    for s in (analytic_spectrum(p, nu), numeric_spectrum(build_liouvillian(p), nu)):
        rep = peak_analysis(s)
        assert len(rep) == 2
        sep = rep.positions[1] - rep.positions[0]
        assert abs(sep - 4 * er.omega_e.real) <= local_step(nu, rep.positions[1])


def test_splitting_approaches_four_omega_b():
    ratios = [4 * effective_rates(ModelParams.horizontal(omega=0.05, omega_b=b)).omega_e.real / (4 * b)
              for b in (0.5, 1.0, 2.0, 8.0)]
    devs = [abs(r - 1) for r in ratios]
    assert devs == sorted(devs, reverse=True) and devs[-1] < 1e-3


def test_numeric_spectrum_is_order_independent():
    lv = build_liouvillian(ModelParams.horizontal(omega=0.7, omega_b=0.9))
    nu = np.linspace(-4, 4, 5001)
    a = numeric_spectrum(lv, nu)
    b = numeric_spectrum(lv, nu[::-1])
    assert np.array_equal(a.values, b.values[::-1])
    assert np.array_equal(a.values, numeric_spectrum(lv, nu).values)


# -- peaks -------------------------------------------------------------------

def lorentzian_pair(nu, centre, hw):
    return hw / ((nu - centre) ** 2 + hw**2) + hw / ((nu + centre) ** 2 + hw**2)


def test_lorentzian_width_and_position():
    nu = np.linspace(-3, 3, 6001)
    rep = peak_analysis(Spectrum(nu, lorentzian_pair(nu, 1.2345, 0.05)))
    assert len(rep) == 2
    for q in rep:
        assert q.fwhm == pytest.approx(0.1, abs=nu[1] - nu[0])
        assert abs(abs(q.position) - 1.2345) < 0.1 * (nu[1] - nu[0])
        assert nu[0] <= q.position <= nu[-1] and q.fwhm > 0


def test_analytic_lines_have_width_two_gamma():
    p = ModelParams.horizontal(omega=0.02, omega_b=0.25)
    er = effective_rates(p)
    nu = resolved_grid(p)
    for q in peak_analysis(analytic_spectrum(p, nu)):
        assert q.fwhm == pytest.approx(2 * er.gamma_total, abs=local_step(nu, q.position))


def test_coarse_grid_is_refused():
    nu = np.linspace(-3, 3, 301)
    with pytest.raises(GridTooCoarseError):
        peak_analysis(Spectrum(nu, lorentzian_pair(nu, 1.0, 0.05)))


def test_prominence_threshold():
    nu = np.linspace(-3, 3, 6001)
    y = lorentzian_pair(nu, 1.0, 0.05) + 1e-2 * np.exp(-(nu**2) / 0.0025)
    assert len(peak_analysis(Spectrum(nu, y), prominence=1e-3)) == 2
    assert len(peak_analysis(Spectrum(nu, y), prominence=1e-6)) == 3


def test_blocked_side_is_mirrored():
    nu = np.linspace(-3, 3, 6001)
    y = lorentzian_pair(nu, 0.06, 0.05)  # overlapping: the inner half maximum is never reached
    rep = peak_analysis(Spectrum(nu, y))
    assert all(q.fwhm > 0 for q in rep)
