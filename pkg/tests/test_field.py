import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotwaves.errors import DegenerateField
from rotwaves.field import (
    WaveField,
    bernoulli_residual,
    check_nodal,
    from_linear_wave,
    from_stream,
    load_field,
    pde_residual,
    robin_residual,
    save_field,
    stagnation_margin,
)
from rotwaves.linear_wave import build_linear_wave


@pytest.fixture(scope="module")
def stream_field(irrot):
    s, tau = irrot
    return from_stream(s, 2 * np.pi / tau)


def wave_field(stream, tau, t, **kw):
    return from_linear_wave(build_linear_wave(stream, tau, t, **kw))


def test_stream_residuals(stream_field):
    assert np.max(np.abs(pde_residual(stream_field))) <= 1e-9
    assert bernoulli_residual(stream_field)[0] <= 1e-10
    assert stagnation_margin(stream_field) == pytest.approx(0.8, abs=1e-12)


def test_stream_is_degenerate(stream_field):
    with pytest.raises(DegenerateField):
        check_nodal(stream_field)


def test_random_perturbation_detected(stream_field):
    rng = np.random.default_rng(0)
    phi = stream_field.phi.copy()
    phi[1:-1] += 1e-4 * rng.standard_normal(phi[1:-1].shape)
    assert np.max(np.abs(pde_residual(stream_field.with_phi(phi)))) > 1e-3


def test_field_residual_order(quadratic):
    s, tau = quadratic
    r = [np.max(np.abs(pde_residual(wave_field(s, tau, t)))) for t in (0.02, 0.01, 0.005)]
    assert 3.5 <= r[0] / r[1] <= 4.5
    assert 3.5 <= r[1] / r[2] <= 4.5


def test_bernoulli_order_on_and_off_root(irrot):
    s, tau = irrot
    on = [bernoulli_residual(wave_field(s, tau, t))[0] for t in (0.02, 0.01)]
    off = [bernoulli_residual(wave_field(s, 1.1 * tau, t))[0] for t in (0.02, 0.01)]
    assert 3.5 <= on[0] / on[1] <= 4.5
    assert 1.8 <= off[0] / off[1] <= 2.2


def test_nodal_linear_wave(irrot):
    s, tau = irrot
    up = check_nodal(wave_field(s, tau, 0.01))
    down = check_nodal(wave_field(s, tau, -0.01))
    assert up.all_pass and down.all_pass
    assert up.orientation == -down.orientation
    assert all(getattr(up, k).margin > 0 for k in up.KEYS)
    # the wrong orientation fails every sign test
    wrong = check_nodal(wave_field(s, tau, 0.01), orientation=-up.orientation)
    assert not any(wrong.booleans().values())


def test_nodal_report_keys(irrot):
    s, tau = irrot
    d = check_nodal(wave_field(s, tau, 0.01)).to_dict()
    for k in (
        "property_i", "property_ii_left", "property_ii_right", "property_ii_bed",
        "property_iii_left", "property_iii_right", "stagnation_margin", "bernoulli_sup",
        "robin_sup", "surface_monotone", "margins",
    ):
        assert k in d
    json.dumps(d)


def test_stagnation_margin_perturbation(irrot):
    s, tau = irrot
    m = [stagnation_margin(wave_field(s, tau, t)) for t in (0.02, 0.01)]
    assert abs(m[0] - 0.8) == pytest.approx(2 * abs(m[1] - 0.8), rel=0.1)


def test_stagnation_margin_scaling(irrot):
    s, tau = irrot
    f = wave_field(s, tau, 0.01)
    base = stagnation_margin(f)
    for eps in (1e-1, 1e-3, 1e-6):
        assert stagnation_margin(f.with_phi(eps * f.phi)) == pytest.approx(eps * base, rel=1e-12)


def test_robin_residual_order(irrot):
    s, tau = irrot
    r = [robin_residual(wave_field(s, tau, t))[0] for t in (0.02, 0.01)]
    assert 3.5 <= r[0] / r[1] <= 4.5


def test_slope_vanishes_on_sides(irrot):
    s, tau = irrot
    px = wave_field(s, tau, 0.05).derivatives[0]
    assert np.max(np.abs(px[:, [0, -1]])) <= 1e-10


def test_surface_monotone_sign(irrot):
    s, tau = irrot
    assert check_nodal(wave_field(s, tau, 0.01)).surface_monotone == -1
    assert check_nodal(wave_field(s, tau, -0.01)).surface_monotone == 1


def test_json_round_trip(tmp_path, quadratic):
    s, tau = quadratic
    f = wave_field(s, tau, 0.01)
    save_field(f, tmp_path / "f.json")
    g = load_field(tmp_path / "f.json")
    assert np.array_equal(f.phi, g.phi) and np.array_equal(f.eta, g.eta)
    assert g.vort == f.vort and g.regime == f.regime


def test_json_rejects_wrong_format():
    with pytest.raises(ValueError):
        WaveField.from_dict({"format": "other"})


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.05, 0.05).filter(lambda t: abs(t) > 1e-3), st.sampled_from(["fixed_period", "variable_period"]))
def test_coordinate_invariance(irrot, t, regime):
    s, tau = irrot
    f = wave_field(s, tau, t, regime=regime)
    a = check_nodal(f, mode="computational")
    b = check_nodal(f, mode="physical")
    assert a.booleans() == b.booleans()


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.integers(2, 5))
def test_stability_under_small_perturbation(irrot, c, k):
    s, tau = irrot
    f = wave_field(s, tau, 0.01)
    rep = check_nodal(f)
    M = min(abs(getattr(rep, key).margin) for key in rep.KEYS)
    g = f.grid
    X, Y = np.meshgrid(g.X, g.Y - g.y0)
    # even in X, vanishes on the bed together with its Y-derivative
    bump = c * (Y / g.h) ** 2 * (1 - Y / g.h) * np.cos(k * g.tau * X)
    size = np.max(np.abs(bump)) * (1 + (k * g.tau) ** 2 + 12 / g.h**2)
    pert = f.with_phi(f.phi + bump * (M / 10) / max(size, 1e-300))
    assert check_nodal(pert).booleans() == rep.booleans()
