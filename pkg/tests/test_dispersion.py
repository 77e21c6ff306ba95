import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotwaves.dispersion import (
    MU1_NONPOSITIVE,
    MU1_POSITIVE,
    eigen_spectrum,
    eigenvalue_count,
    find_tau_star,
    gamma_profile,
    pole_fit,
    rho0,
    sigma_crosscheck,
    sigma_scan,
    transversality,
)
from rotwaves.errors import NoBifurcation, ResonantTau
from rotwaves.uniform_stream import solve_uniform_stream
from rotwaves.vorticity import linear, polynomial, zero


def closed_sigma(tau, lam, h=1.0):
    return lam * tau / np.tanh(tau * h) - 1.0 / lam


@pytest.mark.parametrize("b,h", [(-5, 1), (-5, 2), (0, 1), (0, 2), (3, 1), (3, 2)])
def test_first_eigenvalue_affine(b, h, oracles):
    s = solve_uniform_stream(linear(b), h, 1.0)
    spec = eigen_spectrum(s, 2)
    assert spec.mus[0] == pytest.approx(oracles["linear_mu1"][f"{b},{h}"], abs=1e-8)
    assert spec.mus[1] == pytest.approx(4 * np.pi**2 / h**2 - b, abs=1e-8)
    assert spec.zero_counts == (0, 1)


def test_eigenfunction_normalized():
    s = solve_uniform_stream(zero(), 1.0, 1.0)
    phi = eigen_spectrum(s, 1).eigenfunctions[0]
    y = np.linspace(0, 1, 201)
    assert np.max(np.abs(np.abs(phi(y)) - np.sqrt(2) * np.sin(np.pi * y))) < 1e-8
    assert np.max(np.abs(phi.residual(y[2:-2]))) < 1e-3


def test_eigenvalue_count_brackets():
    s = solve_uniform_stream(zero(), 1.0, 1.0)
    assert eigenvalue_count(s, np.pi**2 - 0.1) == 0
    assert eigenvalue_count(s, np.pi**2 + 0.1) == 1
    assert eigenvalue_count(s, 4 * np.pi**2 + 0.1) == 2


@pytest.mark.parametrize("tau", [0.5, 2.0, 10.0])
def test_gamma_matches_sinh(tau):
    s = solve_uniform_stream(zero(), 1.0, 0.8)
    g = gamma_profile(s, tau)
    y = np.linspace(0, 1, 401)
    assert np.max(np.abs(g.gamma(y) - np.sinh(tau * y) / np.sinh(tau))) < 1e-8
    assert g.gamma_prime_h == pytest.approx(tau / np.tanh(tau), rel=1e-10)
    assert g.sign_definite


def test_sigma_forms_agree():
    s = solve_uniform_stream(polynomial([0.7, -0.4, 0.2]), 1.0, 0.9)
    g = gamma_profile(s, 1.3)
    assert g.sigma == pytest.approx(sigma_crosscheck(s, g.gamma_prime_h), rel=1e-13)
    assert g.rho0 == pytest.approx(rho0(s))


@pytest.mark.parametrize("lam", [0.5, 0.8, 0.95])
def test_tau_star_irrotational(lam, oracles):
    s = solve_uniform_stream(zero(), 1.0, lam)
    tau, mode = find_tau_star(s)
    assert mode == MU1_POSITIVE
    assert tau == pytest.approx(oracles["irrotational_tau_star"][str(lam)], abs=1e-10)


def test_no_bifurcation_fast_stream():
    s = solve_uniform_stream(zero(), 1.0, 1.2)
    with pytest.raises(NoBifurcation):
        find_tau_star(s)


def test_root_right_of_resonance(resonant, oracles):
    s, tau = resonant
    assert find_tau_star(s)[1] == MU1_NONPOSITIVE
    assert tau == pytest.approx(oracles["linear_2pi2_tau_star"], abs=1e-10)


def test_resonant_tau_rejected(resonant):
    s, _ = resonant
    with pytest.raises(ResonantTau):
        gamma_profile(s, np.pi)


def test_transversality_closed_form(oracles):
    t = transversality(zero(), 1.0, 0.8, oracles["irrotational_tau_star"]["0.8"])
    assert t.value == pytest.approx(oracles["irrotational_transversality_0.8"], rel=1e-7)
    assert t.holds


def test_pole_coefficient(resonant, oracles):
    s, _ = resonant
    fit = pole_fit(s)
    assert fit.tau_pole == pytest.approx(np.pi, abs=1e-8)
    assert fit.fitted == pytest.approx(oracles["linear_2pi2_pole_coefficient"], rel=0.05)
    assert fit.relative_error < 1e-4


def test_scan_marks_resonance(resonant):
    s, _ = resonant
    c = sigma_scan(s, [1.0, np.pi, 5.0])
    assert [x.resonant for x in c.samples] == [False, True, False]
    with pytest.raises(ValueError):
        sigma_scan(s, [2.0, 1.0])


def test_large_tau_ratio_closed_form():
    # sigma/(kappa tau) = coth(tau) - 1/(lam^2 tau); at lam=1, tau=10 this is 0.9
    s = solve_uniform_stream(zero(), 1.0, 1.0)
    c = sigma_scan(s, np.linspace(0.1, 10.0, 100))
    assert c.asymptotic_ratio == pytest.approx(1 / np.tanh(10.0) - 0.1, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 2.0), st.floats(0.05, 30.0))
def test_sigma_against_closed_form(lam, tau):
    s = solve_uniform_stream(zero(), 1.0, lam)
    assert gamma_profile(s, tau).sigma == pytest.approx(closed_sigma(tau, lam), rel=1e-8, abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.5, 0.5), st.sampled_from([1.0, -1.0]))
def test_sigma_increasing_in_tau(a, sign):
    s = solve_uniform_stream(linear(a, 0.2), 1.0, 0.8 * sign)
    c = sigma_scan(s, np.linspace(0.05, 10.0, 200))
    assert np.all(sign * np.diff(c.sigma) > 0)
    assert np.all(np.diff(c.gamma_prime_h) > 0)
