import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_tent.geometry import (
    MobiusMap,
    SpaceParams,
    bergman_distance,
    density_tau,
    density_v_alpha,
    derivative_order,
    in_ball,
    inner,
    mobius_apply,
    mobius_transform,
    normalizing_constant,
    pseudo_distance,
    tau_ball_volume,
)
from bergman_tent.utils import DimensionMismatchError, InvalidParameterError, NotInteriorError, one_minus_squared_norm

MAX_RADIUS = 0.9


@st.composite
def ball_points(draw, n: int, max_radius: float = MAX_RADIUS):
    coords = draw(st.lists(st.floats(-1.0, 1.0), min_size=2 * n, max_size=2 * n))
    radius = draw(st.floats(0.0, max_radius))
    z = np.array(coords[:n]) + 1j * np.array(coords[n:])
    norm = np.linalg.norm(z)
    if norm == 0.0:
        return np.zeros(n, dtype=complex)
    return radius * z / norm


pairs = st.integers(1, 4).flatmap(lambda n: st.tuples(ball_points(n), ball_points(n)))
triples = st.integers(1, 4).flatmap(lambda n: st.tuples(ball_points(n), ball_points(n), ball_points(n)))

SAMPLES = settings(max_examples=1000, deadline=None)


@given(pairs)
@SAMPLES
def test_mobius_is_an_involution(pair):
    a, z = pair
    np.testing.assert_allclose(mobius_transform(a, mobius_transform(a, z)), z, rtol=0.0, atol=1e-12)


@given(pairs)
@SAMPLES
def test_mobius_swaps_zero_and_center(pair):
    a, _ = pair
    np.testing.assert_allclose(mobius_transform(a, np.zeros_like(a)), a, atol=1e-14)
    np.testing.assert_allclose(mobius_transform(a, a), np.zeros_like(a), atol=1e-12)


@given(pairs)
@SAMPLES
def test_magnitude_identity(pair):
    a, z = pair
    image = mobius_transform(a, z)
    expected = one_minus_squared_norm(a) * one_minus_squared_norm(z) / abs(1.0 - inner(z, a)) ** 2
    np.testing.assert_allclose(1.0 - np.sum(np.abs(image) ** 2), expected, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(MobiusMap(a).one_minus_sq_image(z), expected, rtol=1e-12)


@given(pairs)
@SAMPLES
def test_bergman_distance_is_symmetric(pair):
    z, w = pair
    assert bergman_distance(z, w) == bergman_distance(w, z)
    assert pseudo_distance(z, w) == pseudo_distance(w, z)


@given(triples)
@SAMPLES
def test_bergman_distance_is_invariant(triple):
    a, z, w = triple
    np.testing.assert_allclose(
        bergman_distance(mobius_transform(a, z), mobius_transform(a, w)),
        bergman_distance(z, w),
        rtol=1e-7,
        atol=1e-9,
    )


@given(triples)
@SAMPLES
def test_bergman_distance_triangle_inequality(triple):
    x, y, z = triple
    assert bergman_distance(x, z) <= bergman_distance(x, y) + bergman_distance(y, z) + 1e-9


def test_mobius_disc_closed_form():
    np.testing.assert_allclose(mobius_transform([0.5], [0.25]), [0.285714285714285714], rtol=1e-15)
    m = MobiusMap([0.5])
    np.testing.assert_allclose(mobius_apply(m, [0.25]), [(0.5 - 0.25) / (1.0 - 0.125)])


def test_mobius_at_origin_is_negation():
    z = np.array([0.3 + 0.1j, -0.2j])
    np.testing.assert_array_equal(mobius_transform(np.zeros(2), z), -z)


def test_mobius_broadcasts_over_centers_and_points():
    centers = np.array([[0.1, 0.2], [0.5j, 0.0], [0.0, 0.0]])
    points = np.array([[0.3, -0.1j], [0.0, 0.6]])
    out = mobius_transform(centers[:, None, :], points[None, :, :])
    assert out.shape == (3, 2, 2)
    np.testing.assert_allclose(out[1, 0], mobius_transform(centers[1], points[0]))


def test_bergman_distance_from_origin():
    assert bergman_distance([0.0], [0.5]) == pytest.approx(0.5 * math.log(3.0), rel=1e-14)
    assert bergman_distance([0.0, 0.0], [0.3, 0.4]) == pytest.approx(math.atanh(0.5), rel=1e-14)


def test_bergman_distance_near_the_boundary_is_finite():
    z = np.array([1.0 - 1e-12, 0.0])
    w = np.array([1.0 - 2e-12, 0.0])
    assert np.isfinite(bergman_distance(z, w))
    assert bergman_distance(z, w) == pytest.approx(math.atanh(1.0 / 3.0), rel=1e-3)


def test_in_ball_matches_pulled_back_radius():
    center = np.array([0.6, 0.2j])
    gamma = 0.8
    rng = np.random.default_rng(0)
    u = rng.standard_normal((100, 2)) + 1j * rng.standard_normal((100, 2))
    u *= (0.999 * math.tanh(gamma)) / np.linalg.norm(u, axis=-1, keepdims=True)
    assert np.all(in_ball(mobius_transform(center, u), center, gamma))
    assert not in_ball(np.array([-0.9, 0.0]), center, gamma)


def test_inner_rejects_mismatched_dimensions():
    with pytest.raises(DimensionMismatchError):
        inner([0.1, 0.2], [0.1])


def test_points_on_the_sphere_are_rejected():
    with pytest.raises(NotInteriorError):
        mobius_transform([0.0], [1.0])
    with pytest.raises(NotInteriorError):
        MobiusMap([0.8, 0.8j])


def test_normalizing_constants():
    assert normalizing_constant(1, 0.0) == pytest.approx(1.0)
    assert normalizing_constant(1, 1.0) == pytest.approx(2.0)
    assert normalizing_constant(2, 1.0) == pytest.approx(3.0)
    assert normalizing_constant(1, -1.0) == 1.0
    assert normalizing_constant(1, -2.5) == 1.0


def test_densities():
    z = np.array([0.5, 0.0])
    assert density_v_alpha(z, 1.0) == pytest.approx(3.0 * 0.75)
    assert density_tau(z) == pytest.approx(0.75**-3)


def test_tau_ball_volume():
    assert tau_ball_volume(1, 1.0) == pytest.approx(1.3810978455418157, rel=1e-14)
    assert tau_ball_volume(2, 1.0) == pytest.approx(math.sinh(1.0) ** 4)


def test_space_params_atom_bound_and_derivative_order():
    params = SpaceParams(n=1, p=0.5, alpha=0.0)
    assert params.atom_bound() == pytest.approx(4.0)
    assert params.atom_exponent() == pytest.approx(5.0)
    assert SpaceParams(n=2, b=7.0).atom_exponent() == 7.0
    assert derivative_order(2.0, 0.0) == 0
    assert derivative_order(2.0, -1.0) == 1
    assert derivative_order(2.0, -1.5) == 1
    assert derivative_order(1.0, -3.5) == 3
    assert SpaceParams(n=1, p=2.0, alpha=-2.0).derivative_order() == 1


def _random_ball_points(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    return z * rng.uniform(0.0, MAX_RADIUS, size=(count, 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_geometry_identities_over_a_thousand_samples(n):
    rng = np.random.default_rng(n)
    a = _random_ball_points(rng, 1000, n)
    z = _random_ball_points(rng, 1000, n)

    image = mobius_transform(a, z)
    assert np.max(np.abs(mobius_transform(a, image) - z)) < 1e-12
    assert np.max(np.abs(mobius_transform(a, a))) < 1e-12

    expected = one_minus_squared_norm(a) * one_minus_squared_norm(z) / np.abs(1.0 - inner(z, a)) ** 2
    assert np.max(np.abs(one_minus_squared_norm(image) - expected)) < 1e-12

    np.testing.assert_array_equal(bergman_distance(a, z), bergman_distance(z, a))


def test_in_ball_rejects_nonpositive_radius():
    with pytest.raises(InvalidParameterError):
        in_ball(np.zeros(2), np.zeros(2), 0.0)
