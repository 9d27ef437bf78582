import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setguard.lti import (
    ContinuousLTI,
    ControlDesignError,
    DiscreteLTI,
    FeedbackGain,
    closed_loop,
    euler_discretize,
    is_stable,
    place_poles,
)
from setguard.numlin import char_poly_coeffs, poly_from_roots

CART = ContinuousLTI([[0.0, 1.0], [0.0, -7.2]], [[0.0], [1.6]])


@pytest.fixture(scope="module")
def cart_d():
    return euler_discretize(CART, 0.002)


def test_euler_cart_matrices(cart_d):
    assert np.array_equal(cart_d.a, [[1.0, 0.002], [0.0, 1 - 7.2 * 0.002]])
    assert np.allclose(cart_d.a, [[1.0, 0.002], [0.0, 0.9856]], atol=1e-16)
    assert np.allclose(cart_d.b, [[0.0], [0.0032]], atol=1e-18)
    assert cart_d.dt == 0.002


def test_euler_zero_dynamics():
    b = np.array([[0.3], [-2.0]])
    d = euler_discretize(ContinuousLTI(np.zeros((2, 2)), b), 1.0)
    assert np.array_equal(d.a, np.eye(2)) and np.array_equal(d.b, b)


def test_euler_elementwise_oracle(rng):
    a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 1))
    d = euler_discretize(ContinuousLTI(a, b), 0.01)
    for i in range(3):
        for j in range(3):
            assert d.a[i, j] == (1.0 if i == j else 0.0) + 0.01 * a[i, j]
        assert d.b[i, 0] == 0.01 * b[i, 0]


def test_euler_rejects_bad_dt():
    with pytest.raises(ValueError):
        euler_discretize(CART, 0.0)


def test_place_poles_cart(cart_d):
    k = place_poles(cart_d, [0.99, 0.985]).k
    assert np.allclose(k, [[23.4375, 3.3125]], atol=1e-9)
    assert np.all(np.abs(k[0] - [23.3, 3.3]) <= 0.5)


def test_place_poles_open_loop_eigs_give_zero_gain(cart_d):
    assert np.allclose(place_poles(cart_d, [1.0, 0.9856]).k, 0.0, atol=1e-9)


def test_place_poles_uncontrollable():
    sys = DiscreteLTI(np.eye(2), [[1.0], [0.0]], 0.1)
    with pytest.raises(ControlDesignError):
        place_poles(sys, [0.5, 0.4])


def test_place_poles_random_three_state(rng):
    for _ in range(100):
        a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 1))
        poles = rng.uniform(-0.9, 0.9, 3)
        sys = DiscreteLTI(a, b, 0.1)
        k = place_poles(sys, poles)
        got = char_poly_coeffs(a - b @ k.k)
        assert np.allclose(got, poly_from_roots(poles), atol=1e-8)


def test_place_poles_complex_pair(cart_d):
    poles = [0.98 + 0.01j, 0.98 - 0.01j]
    k = place_poles(cart_d, poles)
    assert np.allclose(char_poly_coeffs(closed_loop(cart_d, k).a), poly_from_roots(poles), atol=1e-9)


def test_closed_loop_examples(cart_d):
    assert np.array_equal(closed_loop(cart_d, FeedbackGain(np.zeros((1, 2)))).a, cart_d.a)
    a_cl = closed_loop(cart_d, place_poles(cart_d, [0.99, 0.985])).a
    assert np.allclose(a_cl, [[1.0, 0.002], [-0.075, 0.975]], atol=1e-12)
    assert np.allclose(np.sort(np.roots(char_poly_coeffs(a_cl)).real), [0.985, 0.99], atol=1e-6)


def test_is_stable_examples(cart_d):
    a_cl = closed_loop(cart_d, place_poles(cart_d, [0.99, 0.985])).a
    assert is_stable(a_cl)
    assert not is_stable(np.eye(2))
    assert not is_stable(cart_d.a)


def test_closed_loop_decays(cart_d):
    a_cl = closed_loop(cart_d, place_poles(cart_d, [0.99, 0.985])).a
    x = np.array([0.4, 1.0])
    for _ in range(2000):
        x = a_cl @ x
    assert np.linalg.norm(x) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 0.05), st.floats(1e-4, 0.05))
def test_euler_is_affine_in_dt(dt1, dt2):
    d1, d2 = euler_discretize(CART, dt1), euler_discretize(CART, dt2)
    d12 = euler_discretize(CART, dt1 + dt2)
    assert np.allclose(d12.a - np.eye(2), (d1.a - np.eye(2)) + (d2.a - np.eye(2)), atol=1e-14)
    assert np.allclose(d12.b, d1.b + d2.b, atol=1e-14)


def test_feedback_gain_call():
    k = FeedbackGain([[2.0, 1.0]])
    assert np.allclose(k([1.0, -1.0]), [-1.0])
