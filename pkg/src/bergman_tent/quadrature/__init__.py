"""
Quadrature rules for the measures on the unit ball: v_alpha, sigma, tau on
Bergman balls and the singular radial weights of the g-functions.
"""

import enum
import logging
import math
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from bergman_tent.geometry import (
    as_point,
    in_ball,
    inner,
    mobius_transform,
    normalizing_constant,
    require_interior,
)
from bergman_tent.quadrature.model import ErrorEstimate, ErrorMethod, QuadRule, RuleTarget
from bergman_tent.utils import (
    InvalidParameterError,
    NonFiniteIntegrandError,
    one_minus_squared_norm,
)

__all__ = [
    "DEFAULT_DYADIC_DEPTH",
    "ErrorEstimate",
    "ErrorMethod",
    "QuadRule",
    "RuleTarget",
    "SingularKind",
    "ball_rule",
    "bergman_ball_base",
    "bergman_ball_rule",
    "integrate",
    "monomial_sphere_moment",
    "quadrature_sum",
    "radial_plain_rule",
    "radial_singular_rule",
    "recenter_rule",
    "rejection_ball_integral",
    "sphere_rule",
]

logger = logging.getLogger(__name__)

DEFAULT_DYADIC_DEPTH = 40
"""Dyadic refinement levels toward r = 1; resolves 1 - r down to about 1e-12"""

MIN_SPHERE_SIZE = 8
MIN_SEGMENTS = 4


class SingularKind(enum.Enum):
    """Which singular radial weight a g-function integrates against"""

    ONE_MINUS_R = "one_minus_r"
    """dr / (1 - r)"""
    ONE_MINUS_R_ABSZ = "one_minus_r_absz"
    """dr / (1 - r|z|)"""


###########################
# Sphere rules            #
###########################


def _sphere(n: int, size: int, seed: int, phase_orbit: int) -> QuadRule:
    meta = {"n": n, "size": size, "seed": seed, "phase_orbit": phase_orbit}
    if n == 1:
        angles = 2.0 * np.pi * np.arange(size) / size
        nodes = np.exp(1j * angles)[:, None]
        weights = np.full(size, 1.0 / size)
        return QuadRule(nodes, weights, RuleTarget.SPHERE_SIGMA, meta)

    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((size, 2 * n))
    samples = gauss[:, :n] + 1j * gauss[:, n:]
    samples /= np.linalg.norm(samples, axis=-1, keepdims=True)

    phases = np.exp(2j * np.pi * np.arange(phase_orbit) / phase_orbit)
    nodes = (samples[:, None, :] * phases[None, :, None]).reshape(size * phase_orbit, n)
    weights = np.full(size * phase_orbit, 1.0 / (size * phase_orbit))
    sample_ids = np.repeat(np.arange(size), phase_orbit)
    return QuadRule(nodes, weights, RuleTarget.SPHERE_SIGMA, meta, sample_ids=sample_ids)


def sphere_rule(n: int, size: int, seed: int = 42, phase_orbit: int = 1) -> QuadRule:
    """
    Rule for the normalized surface measure on the unit sphere of C^n.

    For n = 1 this is the size-point equispaced circle rule, exact for
    trigonometric monomials of degree below size. For n >= 2 it draws size
    points uniformly on S^(2n-1) from normalized standard Gaussian vectors;
    with phase_orbit = m every sample also contributes its rotations by the
    m-th roots of unity, so the rule has size * m nodes.
    """
    if size < MIN_SPHERE_SIZE:
        raise InvalidParameterError(f"Sphere rule size must be >= {MIN_SPHERE_SIZE}, got {size}")
    if n < 1:
        raise InvalidParameterError(f"Dimension must be >= 1, got {n}")
    if phase_orbit < 1:
        raise InvalidParameterError(f"Phase orbit must be >= 1, got {phase_orbit}")
    rule = _sphere(n, size, seed, phase_orbit)
    if n == 1:
        rule = rule._replace(coarse=_sphere(1, max(size // 2, 1), seed, 1))
    return rule


def monomial_sphere_moment(J, K, n: int) -> float:
    """Integral of zeta^J conj(zeta)^K over the unit sphere of C^n."""
    J = tuple(int(j) for j in J)
    K = tuple(int(k) for k in K)
    if len(J) != n or len(K) != n:
        raise InvalidParameterError(f"Multi-indices must have length n={n}")
    if J != K:
        return 0.0
    degree = sum(J)
    numerator = math.factorial(n - 1) * math.prod(math.factorial(j) for j in J)
    return numerator / math.factorial(n - 1 + degree)


###########################
# Ball rules              #
###########################


def _default_orbit(n: int) -> int:
    return 1 if n == 1 else 4


def _tensor(radii: np.ndarray, radial_weights: np.ndarray, sphere: QuadRule):
    nodes = (radii[:, None, None] * sphere.nodes[None, :, :]).reshape(-1, sphere.nodes.shape[-1])
    weights = (radial_weights[:, None] * sphere.weights[None, :]).reshape(-1)
    sample_ids = None
    if sphere.sample_ids is not None:
        sample_ids = np.broadcast_to(
            sphere.sample_ids[None, :], (radii.shape[0], sphere.sample_ids.shape[0])
        ).reshape(-1)
    return nodes, weights, sample_ids


def _ball(n: int, alpha: float, radial_size: int, sphere_size: int, seed: int, orbit: int) -> QuadRule:
    # u = r^2 turns r^(2n-1)(1-r^2)^alpha dr into a Jacobi weight on (0, 1)
    x, w = roots_jacobi(radial_size, alpha, n - 1)
    radii = np.sqrt((1.0 + x) / 2.0)
    radial_weights = normalizing_constant(n, alpha) * n * 2.0 ** (-(n + alpha)) * w
    sphere = _sphere(n, sphere_size, seed, orbit)
    nodes, weights, sample_ids = _tensor(radii, radial_weights, sphere)
    meta = {
        "n": n,
        "alpha": alpha,
        "radial_size": radial_size,
        "sphere_size": sphere_size,
        "seed": seed,
        "phase_orbit": orbit,
    }
    return QuadRule(nodes, weights, RuleTarget.BALL_V_ALPHA, meta, sample_ids=sample_ids)


def ball_rule(
    n: int,
    alpha: float,
    radial_size: int,
    sphere_size: int,
    seed: int = 42,
    phase_orbit: int | None = None,
) -> QuadRule:
    """Tensor rule for dv_alpha: Gauss-Jacobi radii composed with a sphere rule."""
    if alpha <= -1.0:
        raise InvalidParameterError(f"Ball rule needs alpha > -1, got {alpha}")
    if radial_size < 1:
        raise InvalidParameterError(f"Radial size must be >= 1, got {radial_size}")
    if sphere_size < MIN_SPHERE_SIZE:
        raise InvalidParameterError(f"Sphere rule size must be >= {MIN_SPHERE_SIZE}, got {sphere_size}")
    orbit = phase_orbit or _default_orbit(n)
    rule = _ball(n, alpha, radial_size, sphere_size, seed, orbit)
    if not rule.stochastic:
        coarse = _ball(n, alpha, max(radial_size // 2, 1), max(sphere_size // 2, 1), seed, orbit)
        rule = rule._replace(coarse=coarse)
    logger.debug(f"Built ball rule n={n} alpha={alpha} with {rule.size} nodes")
    return rule


def _recenter(rule: QuadRule, center: np.ndarray) -> QuadRule:
    n = center.shape[-1]
    alpha = rule.alpha
    jacobian = (
        one_minus_squared_norm(center) / np.abs(1.0 - inner(rule.nodes, center)) ** 2
    ) ** (n + 1.0 + alpha)
    nodes = mobius_transform(center, rule.nodes)
    meta = dict(rule.meta, center=tuple(complex(c) for c in center))
    return rule._replace(nodes=nodes, weights=rule.weights * jacobian, meta=meta, coarse=None)


def recenter_rule(rule: QuadRule, center) -> QuadRule:
    """
    Push a dv_alpha rule forward through phi_center.

    The weights pick up the Jacobian [(1-|c|^2)/|1-<u,c>|^2]^(n+1+alpha), so
    the result still integrates against dv_alpha but places its nodes around
    center instead of the origin.
    """
    if rule.target is not RuleTarget.BALL_V_ALPHA:
        raise InvalidParameterError(f"Only ball_v_alpha rules can be recentered, got {rule.target.value}")
    center = as_point(center)
    require_interior(center)
    recentered = _recenter(rule, center)
    if rule.coarse is not None:
        recentered = recentered._replace(coarse=_recenter(rule.coarse, center))
    return recentered


###########################
# Bergman ball rules      #
###########################


def _bergman_base(n: int, gamma: float, radial_size: int, sphere_size: int, seed: int, orbit: int) -> QuadRule:
    # Hyperbolic radius rho with r = tanh(rho): dtau = 2n sinh^(2n-1)(rho) cosh(rho) drho dsigma
    x, w = roots_legendre(radial_size)
    rho = gamma * (x + 1.0) / 2.0
    radial_weights = gamma / 2.0 * w * 2 * n * np.sinh(rho) ** (2 * n - 1) * np.cosh(rho)
    sphere = _sphere(n, sphere_size, seed, orbit)
    nodes, weights, sample_ids = _tensor(np.tanh(rho), radial_weights, sphere)
    meta = {
        "n": n,
        "gamma": gamma,
        "radial_size": radial_size,
        "sphere_size": sphere_size,
        "seed": seed,
        "phase_orbit": orbit,
        "center": None,
    }
    return QuadRule(nodes, weights, RuleTarget.BERGMAN_BALL_TAU, meta, sample_ids=sample_ids)


def bergman_ball_base(
    n: int,
    gamma: float,
    radial_size: int,
    sphere_size: int,
    seed: int = 42,
    phase_orbit: int | None = None,
) -> QuadRule:
    """
    tau-rule on the Euclidean ball |u| < tanh(gamma), before any Möbius map.

    Mapping its nodes through phi_z gives a rule for tau on D(z, gamma) with
    unchanged weights, since tau is automorphism invariant.
    """
    if gamma <= 0.0:
        raise InvalidParameterError(f"Bergman radius must be positive, got {gamma}")
    if sphere_size < MIN_SPHERE_SIZE:
        raise InvalidParameterError(f"Sphere rule size must be >= {MIN_SPHERE_SIZE}, got {sphere_size}")
    orbit = phase_orbit or _default_orbit(n)
    rule = _bergman_base(n, gamma, radial_size, sphere_size, seed, orbit)
    if not rule.stochastic:
        coarse = _bergman_base(n, gamma, max(radial_size // 2, 1), max(sphere_size // 2, 1), seed, orbit)
        rule = rule._replace(coarse=coarse)
    return rule


def bergman_ball_rule(
    center,
    gamma: float,
    radial_size: int,
    sphere_size: int,
    seed: int = 42,
    phase_orbit: int | None = None,
) -> QuadRule:
    """Rule for tau on D(center, gamma), integrating in pulled-back coordinates."""
    center = as_point(center)
    require_interior(center)
    base = bergman_ball_base(center.shape[-1], gamma, radial_size, sphere_size, seed, phase_orbit)

    def mapped(rule: QuadRule) -> QuadRule:
        meta = dict(rule.meta, center=tuple(complex(c) for c in center))
        return rule._replace(nodes=mobius_transform(center, rule.nodes), meta=meta)

    rule = mapped(base)
    if base.coarse is not None:
        rule = rule._replace(coarse=mapped(base.coarse))
    return rule


def rejection_ball_integral(
    center,
    gamma: float,
    g: Callable[[np.ndarray], np.ndarray],
    samples: int,
    seed: int = 42,
) -> ErrorEstimate:
    """
    Independent Monte Carlo estimate of the tau-integral of g over D(center, gamma).

    Points are drawn uniformly from the whole ball and kept when they fall in
    the Bergman ball; used only to cross-check the pulled-back rules.
    """
    center = as_point(center)
    n = center.shape[-1]
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((samples, 2 * n))
    directions = gauss[:, :n] + 1j * gauss[:, n:]
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    radii = rng.uniform(size=samples) ** (1.0 / (2 * n))
    points = radii[:, None] * directions

    inside = in_ball(points, center, gamma)
    values = np.zeros(samples, dtype=complex)
    kept = points[inside]
    if kept.shape[0] > 0:
        values[inside] = g(kept) * one_minus_squared_norm(kept) ** (-(n + 1.0))
    mean = values.mean()
    se = math.sqrt(np.var(values.real, ddof=1) + np.var(values.imag, ddof=1)) / math.sqrt(samples)
    logger.debug(f"Rejection sampling kept {int(inside.sum())} of {samples} points")
    return ErrorEstimate(_scalar(mean), se, ErrorMethod.MC_STANDARD_ERROR)


###########################
# Radial rules            #
###########################


def _dyadic_gaps(depth: int, cutoff: float) -> np.ndarray:
    """Breakpoints of (0, 1) in the variable 1 - r, from 1 down toward 0."""
    gaps = [2.0**-j for j in range(depth + 1) if 2.0**-j > cutoff]
    if cutoff > 0.0:
        gaps.append(cutoff)
    else:
        gaps.append(0.0)
    return np.array(gaps)


def _radial_plain(segments: int, depth: int, cutoff: float) -> QuadRule:
    x, w = roots_legendre(segments)
    breaks = _dyadic_gaps(depth, cutoff)
    upper_gap = breaks[:-1]
    lower_gap = breaks[1:]
    half = (upper_gap - lower_gap) / 2.0
    # gap = 1 - r, kept separately so that 1 - r is exact near r = 1
    gaps = (upper_gap[:, None] - half[:, None] * (x[None, :] + 1.0)).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    order = np.argsort(-gaps)
    gaps = gaps[order]
    meta = {"segments": segments, "depth": depth, "cutoff": cutoff, "gaps": gaps}
    return QuadRule(1.0 - gaps, weights[order], RuleTarget.RADIAL_PLAIN, meta)


def radial_plain_rule(segments: int, depth: int = DEFAULT_DYADIC_DEPTH, cutoff: float = 0.0) -> QuadRule:
    """
    Composite Gauss-Legendre rule for dr on (0, 1 - cutoff).

    The panels are the dyadic intervals [1 - 2^-j, 1 - 2^-(j+1)] for
    j < depth plus a last panel reaching 1 (or 1 - cutoff), with `segments`
    Gauss points on each.
    """
    if segments < MIN_SEGMENTS:
        raise InvalidParameterError(f"Radial rules need >= {MIN_SEGMENTS} points per panel, got {segments}")
    if not 0.0 <= cutoff < 1.0:
        raise InvalidParameterError(f"Cutoff must lie in [0, 1), got {cutoff}")
    rule = _radial_plain(segments, depth, cutoff)
    return rule._replace(coarse=_radial_plain(max(segments // 2, 1), depth, cutoff))


def _singular_weights(rule: QuadRule, kind: SingularKind, z_mag: float) -> QuadRule:
    gaps = rule.meta["gaps"]
    match kind:
        case SingularKind.ONE_MINUS_R:
            factor = gaps
        case SingularKind.ONE_MINUS_R_ABSZ:
            # 1 - r|z| = (1 - |z|) + |z|(1 - r)
            factor = (1.0 - z_mag) + z_mag * gaps
    meta = dict(rule.meta, kind=kind.value, z_mag=z_mag)
    return rule._replace(weights=rule.weights / factor, target=RuleTarget.RADIAL_SINGULAR, meta=meta)


def radial_singular_rule(
    kind: SingularKind | str,
    z_mag: float,
    segments: int,
    depth: int = DEFAULT_DYADIC_DEPTH,
    cutoff: float = 0.0,
) -> QuadRule:
    """
    Rule for dr/(1-r) or dr/(1-r|z|) on (0, 1 - cutoff).

    The singular factor is folded into the weights of the dyadic composite
    rule, so callers pass the bare integrand, which must vanish at least like
    (1 - r)^q with q > 1 for the dr/(1-r) kind.
    """
    kind = SingularKind(kind)
    if not 0.0 <= z_mag < 1.0:
        raise InvalidParameterError(f"|z| must lie in [0, 1), got {z_mag}")
    plain = radial_plain_rule(segments, depth, cutoff)
    rule = _singular_weights(plain, kind, z_mag)
    return rule._replace(coarse=_singular_weights(plain.coarse, kind, z_mag))


###########################
# Integration             #
###########################


def _scalar(value) -> float | complex:
    value = complex(value)
    return value.real if value.imag == 0.0 else value


def quadrature_sum(rule: QuadRule, values: np.ndarray) -> np.ndarray:
    """Weighted sum over the last axis of values, which indexes the rule's nodes."""
    return np.asarray(values) @ rule.weights


def _values_on(rule: QuadRule, f) -> np.ndarray:
    values = np.asarray(f(rule.nodes) if callable(f) else f)
    if values.shape[0] != rule.size:
        raise InvalidParameterError(f"Expected {rule.size} integrand values, got {values.shape[0]}")
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise NonFiniteIntegrandError(rule.nodes[idx], values[idx])
    return values


def integrate(rule: QuadRule, f) -> ErrorEstimate:
    """
    Integrate f (a callable on the node array, or precomputed node values).

    Monte Carlo rules report the standard error over their independent
    samples; deterministic rules report the difference against their
    half-resolution companion, which needs f as a callable. Precomputed
    values on a deterministic rule come back with method UNAVAILABLE.
    """
    values = _values_on(rule, f)
    value = quadrature_sum(rule, values)

    if rule.sample_ids is not None:
        count = int(rule.sample_ids.max()) + 1
        per_sample_re = np.bincount(rule.sample_ids, weights=rule.weights * values.real, minlength=count)
        per_sample_im = np.bincount(
            rule.sample_ids, weights=rule.weights * np.imag(values), minlength=count
        )
        se = math.sqrt(
            np.var(per_sample_re * count, ddof=1) + np.var(per_sample_im * count, ddof=1)
        ) / math.sqrt(count)
        return ErrorEstimate(_scalar(value), se, ErrorMethod.MC_STANDARD_ERROR)

    if rule.coarse is None or not callable(f):
        return ErrorEstimate(_scalar(value), math.nan, ErrorMethod.UNAVAILABLE)
    coarse_value = quadrature_sum(rule.coarse, _values_on(rule.coarse, f))
    return ErrorEstimate(_scalar(value), float(abs(value - coarse_value)), ErrorMethod.NESTED_RULE_DIFFERENCE)
