import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import faraday_model, lindblad_rhs, rk4
from spinscatter.errors import InvalidParameterError
from spinscatter.liouville import (DEG_TOL, build_liouvillian, change_basis_superop, expm, propagate,
                                   steady_state, unvec, vec)
from spinscatter.model import Basis, ModelParams, standard_operators

params = st.builds(
    ModelParams,
    gamma=st.floats(0.2, 3.0),
    delta=st.floats(-2, 2),
    omega_b=st.floats(0, 2),
    omega_r=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    omega_l=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    gamma_pd=st.floats(0, 0.5),
)


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return a + a.conj().T


def spectral_gap(lv):
    w, _, _ = lv.eig()
    damped = w[np.abs(w) >= lv.zero_tol]
    return float(np.min(-damped.real))


def test_vec_is_column_stacking():
    a = np.arange(16).reshape(4, 4)
    assert np.array_equal(vec(a)[:4], a[:, 0])
    assert np.array_equal(unvec(vec(a)), a)


@given(params, st.integers(0, 2**32 - 1))
def test_generator_matches_matrix_form(p, seed):
    rng = np.random.default_rng(seed)
    h, jumps = faraday_model(p.gamma, p.delta, p.omega_b, p.omega_r, p.omega_l, p.gamma_pd)
    rho = random_density(rng)
    lv = build_liouvillian(p, Basis.FARADAY)
    assert np.allclose(lv(rho), lindblad_rhs(h, jumps)(rho), atol=1e-12)


def test_bare_decay():
    lv = build_liouvillian(ModelParams(gamma=1.3), Basis.FARADAY)
    ops = standard_operators(Basis.FARADAY)
    rho0 = ops["proj_Up"].entries
    for t in (0.3, 1.0, 2.5):
        rho = propagate(lv, rho0, t)
        assert np.trace(ops["P_e"].entries @ rho).real == pytest.approx(math.exp(-1.3 * t), rel=1e-12)
        assert np.trace(ops["proj_up"].entries @ rho).real == pytest.approx(1 - math.exp(-1.3 * t), rel=1e-12)


@given(params)
def test_faraday_and_voigt_generators_are_conjugate(p):
    c = change_basis_superop()
    lf = build_liouvillian(p, Basis.FARADAY).matrix
    lvg = build_liouvillian(p, Basis.VOIGT).matrix
    assert np.allclose(c @ lf @ c.conj().T, lvg, atol=1e-12)


def test_trace_preservation_and_hermiticity(rng):
    p = ModelParams.horizontal(delta=0.3, omega_b=0.7, omega=0.9, gamma_pd=0.1)
    lv = build_liouvillian(p)
    trace_row = vec(np.eye(4)).conj()
    assert np.max(np.abs(trace_row @ lv.matrix)) < 1e-13
    for _ in range(100):
        rho = random_hermitian(rng)
        out = lv(rho)
        assert abs(np.trace(out)) < 1e-12
        assert np.allclose(lv(rho.conj().T), out.conj().T, atol=1e-12)


@given(params)
def test_spectrum_of_generator_is_in_left_half_plane(p):
    lv = build_liouvillian(p)
    w, _, _ = lv.eig()
    assert np.all(w.real <= DEG_TOL * max(lv.norm, 1.0))


def test_undriven_steady_state_is_degenerate():
    lv = build_liouvillian(ModelParams.horizontal(omega_b=0.4))
    ss = steady_state(lv)
    assert ss.degenerate and ss.null_dimension >= 2
    assert np.allclose(ss.rho.entries, 0.5 * standard_operators()["P_g"].entries, atol=1e-12)


def test_weak_drive_steady_state_against_long_rk4():
    p = ModelParams.horizontal(omega=0.05, omega_b=0.25)
    ss = steady_state(build_liouvillian(p))
    assert not ss.degenerate
    h, jumps = faraday_model(1.0, 0.0, 0.25, 0.05, 0.05)
    rho0 = np.diag([0.5, 0, 0.5, 0]).astype(complex)
    rho_long = rk4(lindblad_rhs(h, jumps), rho0, 4000.0, 80000)
    ops = standard_operators(Basis.FARADAY)
    v = ss.rho
    for name in ("proj_up", "proj_down", "P_e"):
        assert v.expect(ops[name]) == pytest.approx(np.trace(ops[name].entries @ rho_long), abs=1e-7)
    assert v.expect(ops["proj_up"]).real == pytest.approx(0.5, abs=0.01)
    assert v.expect(ops["P_e"]).real < 10 * 0.05**2


@given(params)
@settings(max_examples=30)
def test_steady_state_is_stationary(p):
    lv = build_liouvillian(p)
    ss = steady_state(lv)
    assert np.linalg.norm(lv.matrix @ vec(ss.rho.entries)) < 1e-9 * max(lv.norm, 1)


def test_propagate_zero_time_and_negative_time(rng):
    lv = build_liouvillian(ModelParams.horizontal(omega=0.5, omega_b=0.3))
    rho = random_density(rng)
    assert np.array_equal(propagate(lv, rho, 0.0), rho)
    with pytest.raises(InvalidParameterError):
        propagate(lv, rho, -1.0)


@given(params, st.integers(0, 2**32 - 1), st.floats(0, 20))
@settings(max_examples=40)
def test_cptp_along_trajectory(p, seed, t):
    rng = np.random.default_rng(seed)
    lv = build_liouvillian(p)
    rho = propagate(lv, random_density(rng, rank=int(rng.integers(1, 5))), t / p.gamma)
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -1e-8


@given(params, st.floats(0, 5), st.floats(0, 5))
@settings(max_examples=40)
def test_semigroup(p, t1, t2):
    lv = build_liouvillian(p)
    x = vec(random_density(np.random.default_rng(1)))
    assert np.allclose(lv.exp(t1 + t2) @ x, lv.exp(t2) @ (lv.exp(t1) @ x), atol=1e-9)


@given(params, st.floats(0.01, 8))
@settings(max_examples=20)
def test_expm_and_ode_agree(p, t):
    lv = build_liouvillian(p)
    x = vec(random_density(np.random.default_rng(2)))
    a = propagate(lv, x, t, method="expm")
    b = propagate(lv, x, t, method="ode")
    assert np.linalg.norm(a - b) <= 1e-8 * np.linalg.norm(a)


@pytest.mark.parametrize("scale", [1e-6, 0.1, 1.0, 7.0, 60.0, 900.0])
def test_expm_against_scipy(scale):
    rng = np.random.default_rng(3)
    a = (rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))) * scale / 16
    ref = scipy.linalg.expm(a)
    assert np.linalg.norm(expm(a) - ref) <= 1e-11 * np.linalg.norm(ref)


def test_exp_cache_returns_same_object():
    lv = build_liouvillian(ModelParams.horizontal(omega=0.5))
    assert lv.exp(0.5) is lv.exp(0.5)


def test_generator_is_immutable():
    lv = build_liouvillian(ModelParams.horizontal(omega=0.5))
    with pytest.raises(ValueError):
        lv.matrix[0, 0] = 1


def test_pure_dephasing_damps_ground_coherence_at_its_rate():
    lv = build_liouvillian(ModelParams(gamma=1.0, gamma_pd=0.37))
    v = standard_operators()
    coh = 0.5 * (v["proj_plus"].entries + v["proj_minus"].entries)
    coh[0, 2] = coh[2, 0] = 0.5
    out = propagate(lv, coh, 2.0)
    assert out[0, 2].real == pytest.approx(0.5 * math.exp(-0.37 * 2.0), rel=1e-12)


@given(params)
@settings(max_examples=30)
def test_observables_agree_across_bases(p):
    # the stationary state has condition number ~ 1/gap; keep it well posed
    assume(spectral_gap(build_liouvillian(p)) > 1e-4)
    sf = steady_state(build_liouvillian(p, Basis.FARADAY))
    sv = steady_state(build_liouvillian(p, Basis.VOIGT))
    for name in ("P_e", "proj_up", "proj_plus", "sigma_x", "sigma_y"):
        op = standard_operators(Basis.FARADAY)[name]
        assert abs(sf.rho.expect(op) - sv.rho.expect(op)) < 1e-10
