import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewlav.jets import Jet


def rand_jet(rng, order):
    return Jet(rng.standard_normal(order + 1) + 1j * rng.standard_normal(order + 1),
               order)


def test_identity_composition():
    rng = np.random.default_rng(7)
    for order in range(1, 7):
        f = rand_jet(rng, order)
        ident = Jet.identity(order)
        assert np.allclose(f.compose(ident).coeffs, f.coeffs)


def test_compose_requires_zero_constant():
    f = Jet([1.0, 2.0], 3)
    g = Jet([1.0, 1.0], 3)
    with pytest.raises(ValueError):
        f.compose(g)


def test_truncation_exact():
    # (1 + z)^2 truncated at order 1 keeps only 1 + 2z
    f = Jet([1.0, 1.0], 1)
    sq = f * f
    assert sq.order == 1
    assert np.allclose(sq.coeffs, [1.0, 2.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_mul_commutative_associative(order, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rand_jet(rng, order) for _ in range(3))
    assert np.allclose((a * b).coeffs, (b * a).coeffs)
    assert np.allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-10)


def test_compose_matches_polynomial_expansion():
    # f(z) = z + z^2, g(z) = 2z + 3z^3; f(g) to order 4
    f = Jet([0, 1, 1], 4)
    g = Jet([0, 2, 0, 3], 4)
    comp = f.compose(g)
    # f(g) = g + g^2 = 2z + 3z^3 + 4z^2 + 12z^4 + O(z^6)
    assert np.allclose(comp.coeffs, [0, 2, 4, 3, 12])


def test_eval_and_deriv():
    f = Jet([1, 2, 3], 2)
    assert abs(f.eval(0.5) - (1 + 1.0 + 0.75)) < 1e-15
    assert np.allclose(f.deriv().coeffs, [2, 6])


def test_order_cap():
    with pytest.raises(ValueError):
        Jet([0, 1], 33)
