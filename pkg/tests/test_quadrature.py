import itertools
import math

import numpy as np
import pytest

from bergman_tent.geometry import in_ball
from bergman_tent.quadrature import (
    ErrorMethod,
    RuleTarget,
    SingularKind,
    ball_rule,
    bergman_ball_rule,
    integrate,
    monomial_sphere_moment,
    radial_plain_rule,
    radial_singular_rule,
    recenter_rule,
    rejection_ball_integral,
    sphere_rule,
)
from bergman_tent.utils import InvalidParameterError, NonFiniteIntegrandError


def _monomial(J, K):
    J = np.array(J)
    K = np.array(K)
    return lambda z: np.prod(z**J * np.conj(z) ** K, axis=-1)


def _multi_indices(n: int, max_degree: int):
    for J in itertools.product(range(max_degree + 1), repeat=n):
        if sum(J) <= max_degree:
            yield J


def test_circle_rule_moments_are_exact():
    rule = sphere_rule(1, 16)
    for j, k in itertools.product(range(5), repeat=2):
        result = integrate(rule, _monomial((j,), (k,)))
        assert abs(result.value - monomial_sphere_moment((j,), (k,), 1)) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_sphere_moments_within_standard_error(n):
    rule = sphere_rule(n, 4096, seed=7)
    assert rule.stochastic
    for J in _multi_indices(n, 2):
        result = integrate(rule, _monomial(J, J))
        assert result.method is ErrorMethod.MC_STANDARD_ERROR
        assert abs(result.value - monomial_sphere_moment(J, J, n)) <= 4.0 * result.abs_err + 1e-15


def test_phase_orbit_cancels_unbalanced_moments():
    rule = sphere_rule(2, 64, phase_orbit=8)
    assert rule.size == 64 * 8
    for J, K in [((1, 0), (0, 0)), ((2, 1), (1, 0)), ((0, 3), (1, 0))]:
        assert abs(integrate(rule, _monomial(J, K)).value) < 1e-14


def test_sphere_moment_closed_form():
    assert monomial_sphere_moment((1, 0), (1, 0), 2) == pytest.approx(0.5)
    assert monomial_sphere_moment((1, 1), (1, 1), 2) == pytest.approx(1.0 / 6.0)
    assert monomial_sphere_moment((1, 0), (0, 1), 2) == 0.0


def test_sphere_rules_are_deterministic():
    first = sphere_rule(3, 32, seed=11)
    second = sphere_rule(3, 32, seed=11)
    np.testing.assert_array_equal(first.nodes, second.nodes)
    assert not np.array_equal(first.nodes, sphere_rule(3, 32, seed=12).nodes)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0, 2.5])
def test_ball_rule_is_a_probability_measure(n, alpha):
    rule = ball_rule(n, alpha, 6, 8)
    assert rule.target is RuleTarget.BALL_V_ALPHA
    assert rule.alpha == alpha
    assert abs(rule.weights.sum() - 1.0) < 1e-8
    assert np.all(rule.weights > 0.0)


def test_ball_rule_monomial_norms():
    disc = ball_rule(1, 0.0, 8, 16)
    result = integrate(disc, lambda z: np.abs(z[..., 0]) ** 2)
    assert math.sqrt(result.value) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-8)
    assert result.method is ErrorMethod.NESTED_RULE_DIFFERENCE

    ball = ball_rule(2, 0.0, 8, 1024, seed=3)
    result = integrate(ball, lambda z: np.abs(z[..., 0]) ** 2)
    assert abs(result.value - 1.0 / 3.0) <= 4.0 * result.abs_err + 1e-12


def test_ball_rule_weighted_moment():
    # integral of |z|^2 dv_1 on the disc is 2 B(2, 2) = 1/3
    rule = ball_rule(1, 1.0, 6, 16)
    assert integrate(rule, lambda z: np.abs(z[..., 0]) ** 2).value == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_recentered_rule_integrates_the_same_measure():
    rule = ball_rule(1, 0.0, 24, 64)
    recentered = recenter_rule(rule, [0.5])
    assert recentered.meta["center"] == (0.5 + 0j,)
    assert recentered.weights.sum() == pytest.approx(1.0, abs=1e-8)
    value = integrate(recentered, lambda z: np.abs(z[..., 0]) ** 2).value
    assert value == pytest.approx(0.5, abs=1e-6)


def test_tau_volume_of_a_bergman_disc():
    rule = bergman_ball_rule([0.0], 1.0, 12, 16)
    assert rule.target is RuleTarget.BERGMAN_BALL_TAU
    assert integrate(rule, lambda u: np.ones(u.shape[:-1])).value == pytest.approx(math.sinh(1.0) ** 2, abs=1e-6)


def test_bergman_ball_rule_nodes_lie_in_the_ball():
    center = np.array([0.7, 0.1j])
    rule = bergman_ball_rule(center, 0.5, 6, 8)
    assert np.all(in_ball(rule.nodes, center, 0.5))
    assert rule.weights.sum() == pytest.approx(math.sinh(0.5) ** 4, rel=1e-8)


def test_rejection_sampling_agrees_with_pulled_back_rule():
    center = [0.3]
    gamma = 0.7
    estimate = rejection_ball_integral(center, gamma, lambda x: np.ones(x.shape[:-1]), 200_000, seed=5)
    assert abs(estimate.value - math.sinh(gamma) ** 2) <= 4.0 * estimate.abs_err


def test_beta_integral_against_the_singular_weight():
    rule = radial_singular_rule(SingularKind.ONE_MINUS_R, 0.0, 8)
    r = rule.nodes
    gaps = rule.meta["gaps"]
    assert integrate(rule, r**2 * gaps**2).value == pytest.approx(1.0 / 12.0, rel=1e-12)


def test_shifted_singular_weight():
    rule = radial_singular_rule("one_minus_r_absz", 0.5, 16)
    assert integrate(rule, np.ones(rule.size)).value == pytest.approx(2.0 * math.log(2.0), rel=1e-10)


def test_truncated_radial_rule():
    rule = radial_plain_rule(8, cutoff=2.0**-10)
    assert rule.weights.sum() == pytest.approx(1.0 - 2.0**-10, rel=1e-14)
    assert rule.meta["gaps"].min() > 2.0**-10
    np.testing.assert_array_equal(np.sort(rule.nodes), rule.nodes)


def test_non_finite_integrand_is_reported():
    rule = ball_rule(1, 0.0, 4, 8)
    values = np.ones(rule.size)
    values[3] = np.nan
    with pytest.raises(NonFiniteIntegrandError) as excinfo:
        integrate(rule, values)
    np.testing.assert_array_equal(excinfo.value.node, rule.nodes[3])


def test_invalid_rule_parameters():
    with pytest.raises(InvalidParameterError):
        sphere_rule(2, 4)
    with pytest.raises(InvalidParameterError):
        ball_rule(1, -1.0, 4, 8)
    with pytest.raises(InvalidParameterError):
        radial_plain_rule(2)
    with pytest.raises(InvalidParameterError):
        radial_singular_rule(SingularKind.ONE_MINUS_R_ABSZ, 1.0, 8)


@pytest.mark.parametrize("q", [1.5, 2.0, 4.0])
def test_singular_rule_converges_under_segment_doubling(q):
    # integral of r^q (1-r)^(q-1) dr is B(q+1, q)
    def value(segments: int) -> float:
        rule = radial_singular_rule(SingularKind.ONE_MINUS_R, 0.0, segments)
        return integrate(rule, rule.nodes**q * rule.meta["gaps"] ** q).value

    coarse, fine = value(64), value(128)
    assert abs(fine - coarse) < 1e-8
    assert fine == pytest.approx(math.gamma(q + 1.0) * math.gamma(q) / math.gamma(2.0 * q + 1.0), rel=1e-7)


def test_rejection_sampling_agrees_at_random_centers():
    def g(u):
        squared = np.sum(np.abs(u) ** 2, axis=-1)
        return (1.0 - squared) ** 2 * (1.0 + u[..., 0].real + squared)

    rng = np.random.default_rng(2024)
    for _ in range(3):
        center = [0.4 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())]
        reference = integrate(bergman_ball_rule(center, 1.0, 16, 32), g).value
        estimate = rejection_ball_integral(center, 1.0, g, 2_000_000, seed=int(rng.integers(1000)))
        assert abs(estimate.value - reference) <= 0.01 * abs(reference)


def test_node_values_have_no_error_estimate():
    rule = ball_rule(1, 0.0, 8, 16)
    f = lambda z: np.abs(z[..., 0]) ** 4  # noqa: E731
    from_values = integrate(rule, f(rule.nodes))
    from_callable = integrate(rule, f)
    assert from_values.method is ErrorMethod.UNAVAILABLE
    assert math.isnan(from_values.abs_err)
    assert from_callable.method is ErrorMethod.NESTED_RULE_DIFFERENCE
    assert math.isfinite(from_callable.abs_err)
    assert from_values.value == pytest.approx(from_callable.value, rel=1e-14)
