import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from genauto.errors import AlgebraError, ParameterError, ShapeError
from genauto.semiring import (
    SemiringKind,
    as_matrix,
    bilinear_form,
    hoelder_norm,
    identity,
    mat_add,
    mat_mul,
)

from oracles import reachable_in_steps

B = SemiringKind.BOOLEAN


def test_identity_left_unit():
    m = as_matrix([[1.5, -2.0], [0.25, 4.0]])
    assert np.array_equal(mat_mul(identity(2), m), m)


def test_boolean_nilpotent_chain():
    a = as_matrix([[0, 1], [0, 0]], B)
    assert mat_mul(a, a).tolist() == [[False, False], [False, False]]


def test_real_idempotent_half_matrix():
    h = as_matrix([[0.5, 0.5], [0.5, 0.5]])
    assert mat_mul(h, h).tolist() == [[0.5, 0.5], [0.5, 0.5]]


def test_mat_mul_errors():
    with pytest.raises(ShapeError):
        mat_mul(np.ones((2, 3)), np.ones((2, 3)))
    with pytest.raises(AlgebraError):
        mat_mul(as_matrix([[1, 0], [0, 1]], B), identity(2))


@pytest.mark.parametrize("left, m, right, expected", [
    ([1.0, 0.0], np.eye(2), [1.0, 0.0], 1.0),
    ([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5], 0.5),
])
def test_bilinear_form_real(left, m, right, expected):
    assert bilinear_form(np.array(left), np.array(m, dtype=float), np.array(right)) == expected


def test_bilinear_form_boolean_single_path():
    l = np.array([True, False])
    r = np.array([False, True])
    assert bilinear_form(l, as_matrix([[0, 1], [0, 0]], B), r) is True


def test_bilinear_form_shape_error():
    with pytest.raises(ShapeError):
        bilinear_form(np.ones(3), np.eye(2), np.ones(2))


@pytest.mark.parametrize("v, alpha, expected", [
    ([3, 4], 2, 5.0),
    ([1, 1, 1], 1, 3.0),
    ([1, -2, 2], math.inf, 2.0),
])
def test_hoelder_examples(v, alpha, expected):
    assert hoelder_norm(v, alpha) == expected


def test_hoelder_rejects_small_alpha():
    with pytest.raises(ParameterError):
        hoelder_norm([1, 2], 0.5)


def test_hoelder_large_alpha_no_overflow():
    assert hoelder_norm([1e300, 1e300], 50) == pytest.approx(1e300 * 2 ** (1 / 50))


small = st.integers(1, 4)
floats = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_real_associativity_and_distributivity(data):
    p, q, r, s = (data.draw(small) for _ in range(4))
    a = data.draw(arrays(np.float64, (p, q), elements=floats))
    b = data.draw(arrays(np.float64, (q, r), elements=floats))
    b2 = data.draw(arrays(np.float64, (q, r), elements=floats))
    c = data.draw(arrays(np.float64, (r, s), elements=floats))
    lhs, rhs = mat_mul(mat_mul(a, b), c), mat_mul(a, mat_mul(b, c))
    scale = 1 + np.abs(a).max() * np.abs(b).max() * np.abs(c).max() * q * r
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * scale)
    dist_l, dist_r = mat_mul(a, mat_add(b, b2)), mat_add(mat_mul(a, b), mat_mul(a, b2))
    assert np.allclose(dist_l, dist_r, rtol=1e-12, atol=1e-12 * (1 + np.abs(a).max() * 20 * q))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_boolean_associativity_and_distributivity(data):
    n = data.draw(small)
    a, b, b2, c = (data.draw(arrays(np.bool_, (n, n))) for _ in range(4))
    assert np.array_equal(mat_mul(mat_mul(a, b), c), mat_mul(a, mat_mul(b, c)))
    assert np.array_equal(mat_mul(a, mat_add(b, b2)), mat_add(mat_mul(a, b), mat_mul(a, b2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: arrays(np.bool_, (n, n))), st.integers(1, 4))
def test_boolean_power_is_reachability(adj, steps):
    power = identity(adj.shape[0], B)
    for _ in range(steps):
        power = mat_mul(power, adj)
    expected = reachable_in_steps(adj.tolist(), steps)
    got = {(i, j) for i, j in zip(*np.nonzero(power))}
    assert got == expected


vec = st.integers(1, 8).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=floats), arrays(np.float64, n, elements=floats)))


@settings(max_examples=100, deadline=None)
@given(vec, st.sampled_from([1, 1.5, 2, 3, math.inf]), st.floats(-5, 5, allow_nan=False))
def test_norm_axioms(xy, alpha, c):
    x, y = xy
    nx, ny = hoelder_norm(x, alpha), hoelder_norm(y, alpha)
    assert nx >= 0
    assert hoelder_norm(c * x, alpha) == pytest.approx(abs(c) * nx, rel=1e-9, abs=1e-9)
    assert hoelder_norm(x + y, alpha) <= nx + ny + 1e-9
