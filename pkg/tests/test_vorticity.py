import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotwaves.vorticity import VorticityFn, linear, polynomial, zero

coef = st.floats(-10, 10, allow_nan=False)


def test_zero_is_zero_everywhere():
    w = zero()
    assert w.eval(0.3) == 0.0
    assert np.all(w.eval(np.linspace(-1, 1, 5)) == 0)
    assert w.is_affine


def test_linear_ordering():
    w = linear(3.0, 2.0)
    assert w.eval(1.0) == pytest.approx(5.0)
    assert w.eval_deriv(7.0) == pytest.approx(3.0)
    assert w.eval_second_deriv(7.0) == 0.0


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        VorticityFn("cubic", (1.0,))
    with pytest.raises(ValueError):
        polynomial([1.0, np.nan])


@given(st.lists(coef, min_size=1, max_size=5), st.floats(-3, 3))
def test_polynomial_matches_numpy(cs, p):
    w = polynomial(cs)
    assert w.eval(p) == pytest.approx(np.polynomial.polynomial.polyval(p, cs), abs=1e-9)
    h = 1e-5
    fd = (w.antiderivative(p + h) - w.antiderivative(p - h)) / (2 * h)
    assert fd == pytest.approx(w.eval(p), rel=1e-6, abs=1e-6)
    assert w.antiderivative(0.0) == 0.0


@given(st.lists(coef, min_size=0, max_size=4))
def test_dict_round_trip(cs):
    for w in (zero(), polynomial(cs), linear(*(cs + [0.0, 0.0])[:2])):
        assert VorticityFn.from_dict(w.to_dict()) == w
