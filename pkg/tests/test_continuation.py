import numpy as np
import pytest

from rotwaves.continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    Discretization,
    PinAmplitude,
    PinParameter,
    continue_branch,
    detect_loop,
    detect_termination,
    loop_certificate,
    newton_solve,
    thresholds_for,
)
from rotwaves.errors import NewtonFailure, SurfaceTouchesBed
from rotwaves.field import bernoulli_residual, from_linear_wave, from_stream, pde_residual
from rotwaves.linear_wave import build_linear_wave


def _point(i, **kw):
    base = dict(
        index=i, t=0.01 * i, parameter=1.0, arclength=0.01 * i, newton_residual=0.0,
        iterations=1, Q=0.5, m=1.0, stagnation_margin=0.8, bernoulli_sup=0.0,
        min_surface_height=1.0, eta_sup=0.01 * i, norm=1.0, surface_monotone=-1,
        metric=np.array([0.01 * i, 1.0]),
    )
    base.update(kw)
    return BranchPoint(**base)


def test_residual_matches_field_module(irrot):
    s, tau = irrot
    f = from_linear_wave(build_linear_wave(s, tau, 0.02), 12, 48)
    phi = f.phi.copy()
    phi[-1] = 0.0
    f = f.with_phi(phi)
    for regime_field in (f,):
        d = Discretization.for_field(regime_field)
        F = d.residual(d.pack(regime_field))[0]
        assert np.allclose(F[: d.n_phi], pde_residual(regime_field).ravel(), atol=1e-13)
        assert np.allclose(F[d.n_phi :], bernoulli_residual(regime_field)[1], atol=1e-13)


def test_newton_trivial_returns_immediately(irrot):
    s, tau = irrot
    f = from_stream(s, 2 * np.pi / tau, 12, 48)
    g = newton_solve(f, PinAmplitude(0.0))
    assert g.meta["iterations"] == 0
    assert np.array_equal(g.phi[1:-1], f.phi[1:-1])


def test_newton_from_linear_wave(irrot):
    s, tau = irrot
    out = []
    for t in (0.02, 0.01):
        f = from_linear_wave(build_linear_wave(s, tau, t), 12, 48)
        g = newton_solve(f)
        assert g.meta["newton_residual"] <= 1e-9
        assert g.t == pytest.approx(t, abs=1e-12)
        out.append(np.max(np.abs(g.eta - np.eye(12)[1] * t)))
    assert 3.0 <= out[0] / out[1] <= 5.0


def test_newton_invalid_geometry(irrot):
    s, tau = irrot
    f = from_stream(s, 2 * np.pi / tau, 12, 48)
    eta = np.zeros(12)
    eta[1] = 1.5
    with pytest.raises((NewtonFailure, SurfaceTouchesBed)):
        newton_solve(f.with_phi(f.phi, eta=eta), PinParameter(0.8))


def test_fixed_branch(fixed_branch):
    b = fixed_branch
    assert b.termination == "max_steps"
    assert len(b.points) == 21
    assert all(p.newton_residual <= 1e-9 for p in b.points)
    assert all(p.nodal.all_pass for p in b.points[1:])
    assert len(set(b.orientations())) == 1
    assert len({p.surface_monotone for p in b.points[1:]}) == 1
    assert b.loop.certificate is None
    assert [u[0] for u in b.loop.uniform_hits] == [0]


def test_fixed_branch_first_order(fixed_branch, irrot):
    # near the bifurcation the computed surface is t cos(tau X) + O(t^2)
    p = fixed_branch.points[1]
    assert np.max(np.abs(p.field.eta[2:])) < 10 * p.t**2


def test_variable_branch_order(variable_branch):
    b = variable_branch
    p0 = b.header["parameter_bifurcation"]
    t, d = np.abs(b.amplitudes[1:]), np.abs(b.parameters[1:] - p0)
    slope = np.polyfit(np.log(t), np.log(d), 1)[0]
    assert 1.7 <= slope <= 2.3


def test_trivial_seed(irrot):
    s, tau = irrot
    b = continue_branch(build_linear_wave(s, tau, 0.0), ContinuationConfig(max_steps=3))
    assert b.trivial and b.termination == "max_steps"
    assert all(p.nodal is None for p in b.points)
    assert np.allclose(np.diff(b.parameters), 0.005 * 0.8)


def test_negative_seed_flips_orientation(irrot, fixed_branch):
    s, tau = irrot
    b = continue_branch(build_linear_wave(s, tau, -0.01), ContinuationConfig(max_steps=3))
    assert set(b.orientations()) == {-o for o in set(fixed_branch.orientations())}
    assert b.points[1].t < 0
    # first-order symmetry x -> x + Lambda/2 maps t to -t at the same parameter
    assert b.points[1].parameter == pytest.approx(fixed_branch.points[1].parameter, rel=1e-6)


def test_step_halving_consistency(irrot, fixed_branch):
    s, tau = irrot
    half = continue_branch(build_linear_wave(s, tau, 0.01), ContinuationConfig(ds=0.0025, max_steps=4))
    # point 4 at ds/2 sits at (roughly) the same arclength as point 2 at ds
    a, b = half.points[4], fixed_branch.points[2]
    assert abs(a.t - b.t) < 1e-3
    lam = np.interp(a.t, fixed_branch.amplitudes, fixed_branch.parameters)
    assert abs(a.parameter - lam) < 1e-6


def test_termination_thresholds():
    cfg = ContinuationConfig()
    th = thresholds_for(cfg, 0.8, 1.0, 1.0, 4.0)
    b = Branch("fixed_period", [_point(0), _point(1, stagnation_margin=1e-4)])
    assert detect_termination(b, th) == "stagnation_approach"
    b = Branch("fixed_period", [_point(0), _point(1, min_surface_height=1e-4)])
    assert detect_termination(b, th) == "bed_approach"
    b = Branch("fixed_period", [_point(0), _point(1, norm=1e4)])
    assert detect_termination(b, th) == "unbounded_solution"
    b = Branch("variable_period", [_point(0), _point(1, parameter=1e3)])
    assert detect_termination(b, th) == "period_degenerate"
    b = Branch("fixed_period", [_point(i) for i in range(21)])
    assert detect_termination(b, th) == "max_steps"
    b = Branch("fixed_period", [_point(i) for i in range(5)])
    assert detect_termination(b, th) is None


def circle(n, closed):
    ang = np.linspace(0, 2 * np.pi if closed else 1.5 * np.pi, n)
    pts = [_point(i, metric=np.array([0.1 * np.cos(a), 0.1 * np.sin(a), 1.0]), arclength=0.1 * a,
                  eta_sup=abs(0.1 * np.cos(a))) for i, a in enumerate(ang)]
    return Branch("fixed_period", pts)


def test_loop_detector_synthetic():
    rep = detect_loop(circle(40, True))
    assert rep.certificate is not None and rep.certificate[:2] == (0, 39)
    assert detect_loop(circle(40, False)).certificate is None
    th = thresholds_for(ContinuationConfig(max_steps=100), 0.8, 1.0, 1.0, 4.0)
    assert detect_termination(circle(40, True), th) == "loop_detected"


def test_uniform_hits_and_warning():
    pts = [_point(i, eta_sup=0.0 if i in (0, 7) else 0.1, parameter=1.0 + 0.1 * i) for i in range(12)]
    rep = detect_loop(Branch("variable_period", pts))
    assert [u[0] for u in rep.uniform_hits] == [0, 7]
    assert rep.artifact_warning
    assert not detect_loop(Branch("fixed_period", pts)).artifact_warning


def test_loop_certificate_needs_return():
    V = np.zeros((5, 2))
    assert loop_certificate(V, np.zeros(5), 1e-6) is None


def test_config_validation():
    with pytest.raises(ValueError):
        ContinuationConfig(ds=-1.0)
    with pytest.raises(ValueError):
        ContinuationConfig(nx=2)
