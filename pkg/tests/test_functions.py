import numpy as np
import pytest
from pydantic import ValidationError

from bergman_tent.functions import (
    Atom,
    Combination,
    HoloFunAdapter,
    KernelPower,
    Monomial,
    Term,
    build_lattice,
    constant,
    evaluate,
    gradient,
    invariant_gradient_norm,
    make_atom,
    minus_value_at_origin,
    monomial,
    radial_derivative,
    scaled,
    synthesize_atomic,
    zero,
)
from bergman_tent.geometry import bergman_distance
from bergman_tent.utils import (
    AtomHypothesisError,
    DimensionMismatchError,
    InvalidParameterError,
    NotInteriorError,
    one_minus_squared_norm,
    squared_norm,
)

H = 1e-6


def _sample_points(n: int, count: int = 20, max_radius: float = 0.6, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    z /= np.linalg.norm(z, axis=-1, keepdims=True)
    return z * rng.uniform(0.0, max_radius, size=(count, 1))


def _functions_2d():
    kernel = KernelPower(center=(0.3, 0.2j), b=2.5, scale=1.0 - 0.5j)
    atom = make_atom([0.1j, -0.4], b=4.0, p=1.0, alpha=0.0)
    combo = Combination(
        dim=2,
        terms=(
            Term(coefficient=2.0, function=monomial(2, 1)),
            Term(coefficient=-1j, function=kernel),
            Term(coefficient=0.5, function=atom),
        ),
    )
    return [monomial(1, 0), monomial(2, 3), kernel, atom, combo]


def test_atom_value_at_origin():
    atom = make_atom([0.5], b=3.0, p=2.0, alpha=0.0)
    assert evaluate(atom, [0.0]) == pytest.approx(0.5625, rel=1e-14)
    assert atom.coefficient == pytest.approx(0.75**2)


def test_atom_hypothesis_is_enforced():
    with pytest.raises(AtomHypothesisError) as excinfo:
        make_atom([0.2], b=1.0, p=0.5, alpha=0.0)
    assert excinfo.value.bound == pytest.approx(4.0)
    assert "b > n*max(1, 1/p) + (alpha+1)/p" in str(excinfo.value)
    with pytest.raises(ValidationError):
        Atom(center=(0.2,), b=1.0, p=0.5, alpha=0.0)


def test_monomial_values():
    z = np.array([0.5, -0.2j])
    assert evaluate(monomial(2, 1), z) == pytest.approx(0.25 * -0.2j)
    assert evaluate(monomial(0, 0), z) == 1.0
    np.testing.assert_allclose(evaluate(constant(2, 3.0), _sample_points(2)), 3.0)
    np.testing.assert_array_equal(evaluate(zero(2), _sample_points(2)), 0.0)
    assert evaluate(scaled(monomial(1, 0), 2j), z) == pytest.approx(1j)


@pytest.mark.parametrize("index", range(5))
def test_gradient_matches_finite_differences(index):
    f = _functions_2d()[index]
    z = _sample_points(2, count=10, seed=index)
    grad = gradient(f, z)
    for k in range(2):
        e = np.zeros(2)
        e[k] = H
        expected = (evaluate(f, z + e) - evaluate(f, z - e)) / (2.0 * H)
        np.testing.assert_allclose(grad[:, k], expected, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("index", range(5))
def test_radial_derivative_matches_finite_differences(index):
    f = _functions_2d()[index]
    z = _sample_points(2, count=10, seed=index)
    expected = (evaluate(f, (1.0 + H) * z) - evaluate(f, (1.0 - H) * z)) / (2.0 * H)
    np.testing.assert_allclose(radial_derivative(f, z), expected, rtol=1e-6, atol=1e-7)

    second = (radial_derivative(f, (1.0 + H) * z) - radial_derivative(f, (1.0 - H) * z)) / (2.0 * H)
    np.testing.assert_allclose(radial_derivative(f, z, order=2), second, rtol=1e-6, atol=1e-7)


def test_radial_derivative_of_monomial_scales_by_degree():
    f = monomial(2, 3)
    z = _sample_points(2)
    np.testing.assert_allclose(radial_derivative(f, z, order=3), 125.0 * evaluate(f, z), rtol=1e-12)
    np.testing.assert_array_equal(radial_derivative(f, z, order=0), evaluate(f, z))
    with pytest.raises(InvalidParameterError):
        radial_derivative(f, z, order=-1)


def test_radial_derivative_is_the_gradient_pairing():
    for f in _functions_2d():
        z = _sample_points(2)
        np.testing.assert_allclose(
            radial_derivative(f, z), np.sum(z * gradient(f, z), axis=-1), rtol=1e-12, atol=1e-14
        )


def test_invariant_gradient_identity():
    for f in _functions_2d():
        z = _sample_points(2)
        grad_sq = squared_norm(gradient(f, z))
        radial_sq = np.abs(radial_derivative(f, z)) ** 2
        expected = np.sqrt(one_minus_squared_norm(z) * (grad_sq - radial_sq))
        np.testing.assert_allclose(invariant_gradient_norm(f, z), expected, rtol=1e-9, atol=1e-12)


def test_invariant_gradient_in_one_dimension():
    f = KernelPower(center=(0.5j,), b=3.0)
    z = _sample_points(1, max_radius=0.95)
    expected = one_minus_squared_norm(z) * np.abs(gradient(f, z)[:, 0])
    np.testing.assert_allclose(invariant_gradient_norm(f, z), expected, rtol=1e-12)


def test_pointwise_derivative_chain():
    for f in _functions_2d():
        z = _sample_points(2, count=50, max_radius=0.95, seed=3)
        weight = one_minus_squared_norm(z)
        radial = weight * np.abs(radial_derivative(f, z))
        full = weight * np.sqrt(squared_norm(gradient(f, z)))
        invariant = invariant_gradient_norm(f, z)
        assert np.all(radial <= full * (1.0 + 1e-12) + 1e-300)
        assert np.all(full <= invariant * (1.0 + 1e-12) + 1e-300)


def test_holo_fun_adapter_discriminates_on_kind():
    f = HoloFunAdapter.validate_python({"kind": "monomial", "exponents": [1, 0]})
    assert isinstance(f, Monomial)
    g = HoloFunAdapter.validate_python({"kind": "kernel_power", "center": [0.5, 0.0], "b": 2.0})
    assert isinstance(g, KernelPower)
    with pytest.raises(ValidationError):
        HoloFunAdapter.validate_python({"kind": "kernel_power", "center": [0.8, 0.8], "b": 2.0})
    with pytest.raises(ValidationError):
        HoloFunAdapter.validate_python({"kind": "polynomial", "exponents": [1]})


def test_combination_rejects_mixed_dimensions():
    with pytest.raises(ValidationError):
        Combination(dim=2, terms=(Term(coefficient=1.0, function=monomial(1)),))


def test_evaluation_checks_dimension_and_interior():
    with pytest.raises(DimensionMismatchError):
        evaluate(monomial(1, 0), [0.1])
    with pytest.raises(NotInteriorError):
        evaluate(monomial(1), [1.0])


def test_minus_value_at_origin_vanishes_at_origin():
    f = KernelPower(center=(0.5, 0.1j), b=2.0, scale=3.0)
    g = minus_value_at_origin(f)
    assert abs(evaluate(g, [0.0, 0.0])) < 1e-15
    z = _sample_points(2)
    np.testing.assert_allclose(evaluate(g, z), evaluate(f, z) - 3.0, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("n,delta,r_max", [(1, 0.5, 0.9), (2, 1.0, 0.8)])
def test_lattice_is_separated(n, delta, r_max):
    lattice = build_lattice(n, delta, r_max, shell_cap=64)
    centers = lattice.centers
    assert lattice.n == n
    assert lattice.separation == delta
    np.testing.assert_array_equal(centers[0], np.zeros(n))
    norms = np.sqrt(squared_norm(centers))
    assert np.all(np.diff(norms) >= 0.0)
    assert np.all(norms < 1.0)

    distances = bergman_distance(centers[:, None, :], centers[None, :, :])
    off_diagonal = ~np.eye(lattice.size, dtype=bool)
    assert distances[off_diagonal].min() >= delta * (1.0 - 1e-12)
    assert 1 < lattice.size <= lattice.packing_bound


@pytest.mark.parametrize("n,delta,r_max", [(1, 0.25, 0.95), (2, 0.5, 0.9)])
def test_lattice_covers_the_truncated_ball(n, delta, r_max):
    lattice = build_lattice(n, delta, r_max)
    rng = np.random.default_rng(11)
    gauss = rng.standard_normal((2000, 2 * n))
    directions = gauss[:, :n] + 1j * gauss[:, n:]
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    # half of the points on the outer sphere |z| = r_max
    radii = np.where(np.arange(2000) % 2 == 0, r_max, r_max * rng.uniform(size=2000))
    points = radii[:, None] * directions
    for start in range(0, points.shape[0], 250):
        chunk = points[start : start + 250]
        nearest = bergman_distance(lattice.centers[:, None, :], chunk[None, :, :]).min(axis=0)
        assert nearest.max() <= 2.0 * delta


def test_lattice_is_deterministic_and_truncates():
    first = build_lattice(2, 1.0, 0.9, seed=5, shell_cap=32)
    second = build_lattice(2, 1.0, 0.9, seed=5, shell_cap=32)
    np.testing.assert_array_equal(first.centers, second.centers)
    assert first.truncate(3).size == 3
    np.testing.assert_array_equal(first.truncate(3).centers, first.centers[:3])


def test_lattice_parameter_checks():
    with pytest.raises(InvalidParameterError):
        build_lattice(1, 0.0, 0.9)
    with pytest.raises(InvalidParameterError):
        build_lattice(1, 0.5, 1.0)


def test_synthesize_atomic_drops_zero_coefficients():
    lattice = build_lattice(1, 0.5, 0.8)
    f = synthesize_atomic([1.0, 0.0, 2.0], lattice, b=3.0, p=2.0, alpha=0.0)
    assert len(f.terms) == 2
    z = _sample_points(1)
    expected = evaluate(make_atom(lattice.centers[0], 3.0, 2.0, 0.0), z) + 2.0 * evaluate(
        make_atom(lattice.centers[2], 3.0, 2.0, 0.0), z
    )
    np.testing.assert_allclose(evaluate(f, z), expected, rtol=1e-13)

    assert synthesize_atomic([0.0, 0.0], lattice, b=3.0, p=2.0, alpha=0.0).terms == ()
    with pytest.raises(InvalidParameterError):
        synthesize_atomic(np.ones(lattice.size + 1), lattice, b=3.0, p=2.0, alpha=0.0)
    with pytest.raises(AtomHypothesisError):
        synthesize_atomic([1.0], lattice, b=1.0, p=2.0, alpha=0.0)
