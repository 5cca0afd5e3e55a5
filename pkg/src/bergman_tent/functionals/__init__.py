"""
Pointwise functionals (tent/area integrals, maximal functions, g-functions)
and the weighted norms built from them.
"""

import functools
import logging
import math
from typing import Callable

import numpy as np
from scipy.special import hyp2f1

from bergman_tent.functionals.model import DEFAULT_RESOLUTION, GVariant, PointwiseField, Resolution
from bergman_tent.functions import (
    HoloFun,
    evaluate,
    gradient,
    invariant_gradient_norm,
    radial_derivative,
)
from bergman_tent.geometry import as_point, derivative_order, mobius_transform, normalizing_constant
from bergman_tent.quadrature import (
    DEFAULT_DYADIC_DEPTH,
    ErrorEstimate,
    QuadRule,
    RuleTarget,
    SingularKind,
    bergman_ball_base,
    integrate,
    radial_singular_rule,
)
from bergman_tent.utils import InvalidParameterError, one_minus_squared_norm, squared_norm

__all__ = [
    "DEFAULT_RESOLUTION",
    "GVariant",
    "PointwiseField",
    "Resolution",
    "area_field",
    "area_integral",
    "ball_average",
    "ball_volume",
    "bergman_norm",
    "besov_area",
    "besov_maximal",
    "g_field",
    "g_function",
    "generalized_norm",
    "hl_maximal",
    "j_integral",
    "j_integral_closed_form",
    "lp_norm",
    "maximal_field",
    "maximal_fn",
    "operator_s",
    "operator_s_radial",
    "weighted_integral",
]

logger = logging.getLogger(__name__)

POINT_CHUNK = 64
"""Centers mapped at once; bounds the (chunk, nodes, n) work arrays"""

FieldValues = Callable[[np.ndarray, np.ndarray], np.ndarray]
"""Maps (points, 1 - |points|^2) to values at those points"""


###################################
# Shared rules
###################################


@functools.lru_cache(maxsize=64)
def _ball_base(n: int, gamma: float, resolution: Resolution) -> QuadRule:
    return bergman_ball_base(
        n, gamma, resolution.radial, resolution.sphere, resolution.seed, resolution.phase_orbit
    )


@functools.lru_cache(maxsize=64)
def _candidate_offsets(n: int, gamma: float, resolution: Resolution) -> np.ndarray:
    """Candidate centers around the origin; mapped through phi_z they lie in D(z, gamma)."""
    count = resolution.centers_radial
    angular = resolution.angular_for(n)
    rho = gamma * np.minimum(np.arange(1, count + 1) / count, 1.0 - 1e-6)
    if n == 1:
        directions = np.exp(2j * np.pi * np.arange(angular) / angular)[:, None]
    else:
        rng = np.random.default_rng(resolution.seed + 1)
        gauss = rng.standard_normal((angular, 2 * n))
        directions = gauss[:, :n] + 1j * gauss[:, n:]
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    shells = (np.tanh(rho)[:, None, None] * directions[None, :, :]).reshape(-1, n)
    return np.concatenate([np.zeros((1, n), dtype=complex), shells])


def _batch(z) -> tuple[np.ndarray, tuple[int, ...]]:
    z = as_point(z)
    return z.reshape(-1, z.shape[-1]), z.shape[:-1]


def _mapped(centers: np.ndarray, base: QuadRule) -> tuple[np.ndarray, np.ndarray]:
    """phi_c(u) for every center c and base node u, with 1 - |phi_c(u)|^2 from the magnitude identity."""
    u = base.nodes
    points = mobius_transform(centers[:, None, :], u[None, :, :])
    uc = np.sum(u[None, :, :] * np.conj(centers[:, None, :]), axis=-1)
    one_minus = (
        one_minus_squared_norm(centers)[:, None] * one_minus_squared_norm(u)[None, :] / np.abs(1.0 - uc) ** 2
    )
    return points, one_minus


def _holomorphic_values(f: HoloFun, k: int = 0) -> FieldValues:
    if k == 0:
        return lambda points, one_minus: evaluate(f, points)
    return lambda points, one_minus: one_minus**k * radial_derivative(f, points, k)


def _check_q(q: float, allow_inf: bool) -> None:
    if q < 1.0 or (math.isinf(q) and not allow_inf) or math.isnan(q):
        raise InvalidParameterError(f"Exponent q must lie in [1, {'inf]' if allow_inf else 'inf)'}, got {q}")
    if q == 1.0:
        logger.debug("Area/maximal functional evaluated in the q = 1 regime")


###################################
# Area integrals
###################################


def _area(values: FieldValues, z, q: float, gamma: float, resolution: Resolution) -> np.ndarray:
    centers, shape = _batch(z)
    n = centers.shape[-1]
    base = _ball_base(n, gamma, resolution)
    out = np.empty(centers.shape[0])
    for start in range(0, centers.shape[0], POINT_CHUNK):
        chunk = centers[start : start + POINT_CHUNK]
        points, one_minus = _mapped(chunk, base)
        magnitudes = np.abs(values(points, one_minus))
        if math.isinf(q):
            at_center = np.abs(values(chunk, one_minus_squared_norm(chunk)))
            out[start : start + chunk.shape[0]] = np.maximum(magnitudes.max(axis=-1), at_center)
        else:
            out[start : start + chunk.shape[0]] = (magnitudes**q @ base.weights) ** (1.0 / q)
    return out.reshape(shape)


def area_integral(
    f: HoloFun,
    z,
    q: float,
    gamma: float,
    resolution: Resolution = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """
    A^(q)_gamma(f)(z) = (integral over D(z, gamma) of |f|^q dtau)^(1/q).

    For q = inf this is the largest |f| over the rule's nodes and z itself,
    a lower bound of the supremum over the Bergman ball.
    """
    _check_q(q, allow_inf=True)
    return _area(_holomorphic_values(f), z, q, gamma, resolution)


def besov_area(
    f: HoloFun,
    z,
    q: float,
    gamma: float,
    k: int,
    resolution: Resolution = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """Area integral of the field (1 - |w|^2)^k R^k f(w)."""
    _check_q(q, allow_inf=True)
    return _area(_holomorphic_values(f, k), z, q, gamma, resolution)


###################################
# Maximal functions
###################################


def _maximal(values: FieldValues, z, gamma: float, alpha: float, resolution: Resolution) -> np.ndarray:
    """Largest v_alpha average of |values| over the candidate Bergman balls containing each z."""
    centers, shape = _batch(z)
    n = centers.shape[-1]
    base = _ball_base(n, gamma, resolution)
    offsets = _candidate_offsets(n, gamma, resolution)
    out = np.empty(centers.shape[0])
    for i, point in enumerate(centers):
        candidates = mobius_transform(point, offsets)
        points, one_minus = _mapped(candidates, base)
        magnitudes = np.abs(values(points, one_minus))
        # dv_alpha = c_alpha (1 - |x|^2)^(n+1+alpha) dtau; scaled by the center's factor to avoid underflow
        relative = (one_minus / one_minus_squared_norm(candidates)[:, None]) ** (n + 1.0 + alpha)
        averages = ((magnitudes * relative) @ base.weights) / (relative @ base.weights)
        out[i] = averages.max()
    return out.reshape(shape)


def hl_maximal(
    g: Callable[[np.ndarray], np.ndarray],
    z,
    gamma: float,
    alpha: float,
    resolution: Resolution = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """Non-central Hardy-Littlewood maximal function M_gamma(g)(z) over the candidate-center grid."""
    if alpha <= -1.0:
        raise InvalidParameterError(f"Maximal functions need alpha > -1, got {alpha}")
    return _maximal(lambda points, one_minus: g(points), z, gamma, alpha, resolution)


def maximal_fn(
    f: HoloFun,
    z,
    q: float,
    gamma: float,
    alpha: float,
    resolution: Resolution = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """M^(q)_gamma(f)(z) = M_gamma(|f|^q)(z)^(1/q)."""
    _check_q(q, allow_inf=False)
    if alpha <= -1.0:
        raise InvalidParameterError(f"Maximal functions need alpha > -1, got {alpha}")
    values = _holomorphic_values(f)
    return _maximal(lambda pts, om: np.abs(values(pts, om)) ** q, z, gamma, alpha, resolution) ** (1.0 / q)


def besov_maximal(
    f: HoloFun,
    z,
    q: float,
    gamma: float,
    alpha: float,
    k: int,
    resolution: Resolution = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """
    Maximal function of the field (1 - |u|^2)^k R^k f(u).

    Any real alpha is accepted: the v_alpha averages only use relative weights.
    """
    _check_q(q, allow_inf=False)
    values = _holomorphic_values(f, k)
    return _maximal(lambda pts, om: np.abs(values(pts, om)) ** q, z, gamma, alpha, resolution) ** (1.0 / q)


def ball_volume(z, gamma: float, alpha: float, resolution: Resolution = DEFAULT_RESOLUTION) -> np.ndarray:
    """v_alpha(D(z, gamma)) by pullback quadrature, with c_alpha = 1 for alpha <= -1."""
    centers, shape = _batch(z)
    n = centers.shape[-1]
    base = _ball_base(n, gamma, resolution)
    c_alpha = normalizing_constant(n, alpha)
    out = np.empty(centers.shape[0])
    for start in range(0, centers.shape[0], POINT_CHUNK):
        chunk = centers[start : start + POINT_CHUNK]
        _, one_minus = _mapped(chunk, base)
        out[start : start + chunk.shape[0]] = c_alpha * (one_minus ** (n + 1.0 + alpha) @ base.weights)
    return out.reshape(shape)


def ball_average(
    g: Callable[[np.ndarray], np.ndarray],
    z,
    gamma: float,
    alpha: float,
    resolution: Resolution = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """Average of g over D(z, gamma) against v_alpha."""
    centers, shape = _batch(z)
    n = centers.shape[-1]
    base = _ball_base(n, gamma, resolution)
    out = np.empty(centers.shape[0], dtype=complex)
    for start in range(0, centers.shape[0], POINT_CHUNK):
        chunk = centers[start : start + POINT_CHUNK]
        points, one_minus = _mapped(chunk, base)
        relative = (one_minus / one_minus_squared_norm(chunk)[:, None]) ** (n + 1.0 + alpha)
        out[start : start + chunk.shape[0]] = ((g(points) * relative) @ base.weights) / (relative @ base.weights)
    out = out.reshape(shape)
    return out.real if np.all(out.imag == 0.0) else out


###################################
# g-functions
###################################


@functools.lru_cache(maxsize=256)
def _singular_rule(kind: SingularKind, z_mag: float, segments: int, cutoff: float) -> QuadRule:
    return radial_singular_rule(kind, z_mag, segments, DEFAULT_DYADIC_DEPTH, cutoff)


def g_function(
    f: HoloFun,
    z,
    q: float,
    variant: GVariant | str,
    resolution: Resolution = DEFAULT_RESOLUTION,
    weight: SingularKind | str | None = None,
    cutoff: float = 0.0,
) -> np.ndarray:
    """
    Littlewood-Paley g-function of f at z.

    `weight` overrides the singular radial measure the variant normally uses
    and `cutoff` truncates the radial integral at 1 - cutoff; both exist for
    the partial integrals of the divergence experiment.
    """
    variant = GVariant(variant)
    if not 1.0 < q < math.inf:
        raise InvalidParameterError(f"g-functions need q in (1, inf), got {q}")
    if weight is None:
        weight = SingularKind.ONE_MINUS_R_ABSZ if variant is GVariant.INVARIANT else SingularKind.ONE_MINUS_R
    weight = SingularKind(weight)

    centers, shape = _batch(z)
    out = np.empty(centers.shape[0])
    for i, point in enumerate(centers):
        z_mag = float(np.sqrt(squared_norm(point))) if weight is SingularKind.ONE_MINUS_R_ABSZ else 0.0
        rule = _singular_rule(weight, z_mag, resolution.segments, cutoff)
        points = rule.nodes[:, None] * point[None, :]
        gaps = rule.meta["gaps"]
        match variant:
            case GVariant.RADIAL:
                values = gaps * np.abs(radial_derivative(f, points, 1))
            case GVariant.GRADIENT:
                values = gaps * np.sqrt(squared_norm(gradient(f, points)))
            case GVariant.INVARIANT:
                values = invariant_gradient_norm(f, points)
        out[i] = integrate(rule, values**q).value ** (1.0 / q)
    return out.reshape(shape)


###################################
# Fields
###################################


def area_field(f: HoloFun, q: float, gamma: float, k: int = 0, resolution: Resolution = DEFAULT_RESOLUTION):
    return PointwiseField(
        lambda z: besov_area(f, z, q, gamma, k, resolution),
        {"functional": "area", "q": q, "gamma": gamma, "k": k},
    )


def maximal_field(
    f: HoloFun,
    q: float,
    gamma: float,
    alpha: float,
    k: int = 0,
    resolution: Resolution = DEFAULT_RESOLUTION,
):
    return PointwiseField(
        lambda z: besov_maximal(f, z, q, gamma, alpha, k, resolution),
        {"functional": "maximal", "q": q, "gamma": gamma, "alpha": alpha, "k": k},
    )


def g_field(f: HoloFun, q: float, variant: GVariant | str, resolution: Resolution = DEFAULT_RESOLUTION):
    variant = GVariant(variant)
    return PointwiseField(
        lambda z: g_function(f, z, q, variant, resolution),
        {"functional": f"g_{variant.value}", "q": q},
    )


###################################
# Norms
###################################


def weighted_integral(rule: QuadRule, values, alpha: float) -> ErrorEstimate:
    """
    Integral against c_alpha (1 - |x|^2)^alpha dv using a ball_v_alpha rule of any weight.

    The rule's own weight is divided out at each node, so alpha may differ
    from the rule's (and may be <= -1 when the integrand vanishes fast enough).
    """
    if rule.target is not RuleTarget.BALL_V_ALPHA:
        raise InvalidParameterError(f"Expected a ball_v_alpha rule, got {rule.target.value}")
    n = rule.nodes.shape[-1]
    rule_alpha = rule.alpha
    if alpha == rule_alpha:
        return integrate(rule, values)
    ratio = normalizing_constant(n, alpha) / normalizing_constant(n, rule_alpha)

    def reweight(nodes: np.ndarray, node_values: np.ndarray) -> np.ndarray:
        return node_values * ratio * one_minus_squared_norm(nodes) ** (alpha - rule_alpha)

    if callable(values):
        return integrate(rule, lambda nodes: reweight(nodes, values(nodes)))
    return integrate(rule, reweight(rule.nodes, np.asarray(values)))


def lp_norm(field, p: float, alpha: float, rule: QuadRule) -> float:
    """(integral of field^p dv_alpha)^(1/p); field is callable on points or a node-value array."""
    if alpha <= -1.0:
        raise InvalidParameterError(f"L^p norms need alpha > -1, got {alpha}")
    if p <= 0.0:
        raise InvalidParameterError(f"L^p norms need p > 0, got {p}")
    values = field(rule.nodes) if callable(field) else np.asarray(field)
    result = weighted_integral(rule, np.abs(values) ** p, alpha)
    return float(abs(result.value)) ** (1.0 / p)


def bergman_norm(f: HoloFun, p: float, alpha: float, rule: QuadRule) -> float:
    """||f||_{p, alpha}."""
    return lp_norm(lambda nodes: evaluate(f, nodes), p, alpha, rule)


def generalized_norm(f: HoloFun, p: float, alpha: float, rule: QuadRule) -> float:
    """
    |f(0)| + (integral of (1 - |z|^2)^(pN) |R^N f|^p dv_alpha)^(1/p).

    N is the smallest nonnegative integer with pN + alpha > -1; the rule's
    own weight should be close to alpha + pN for best accuracy.
    """
    if p <= 0.0:
        raise InvalidParameterError(f"Generalized norms need p > 0, got {p}")
    order = derivative_order(p, alpha)
    n = f.dim

    def integrand(nodes: np.ndarray) -> np.ndarray:
        return np.abs(radial_derivative(f, nodes, order)) ** p

    at_origin = float(np.abs(evaluate(f, np.zeros(n))))
    # (1 - |z|^2)^(pN) dv_alpha is c_alpha / c_(alpha+pN) dv_(alpha+pN), with c_alpha = 1 for alpha <= -1
    integral = weighted_integral(rule, integrand, alpha + p * order)
    scale = normalizing_constant(n, alpha) / normalizing_constant(n, alpha + p * order)
    return at_origin + (float(abs(integral.value)) * scale) ** (1.0 / p)


###################################
# Kernel integrals
###################################


def operator_s(
    f: Callable[[np.ndarray], np.ndarray],
    z,
    a_exp: float,
    b_exp: float,
    rule: QuadRule,
) -> np.ndarray:
    """
    Sf(z) = (1 - |z|^2)^a integral of (1 - |w|^2)^b f(w) / |1 - <z, w>|^(n+1+a+b) dv(w).

    The ball_v_alpha rule's own weight is divided out at every node.
    """
    if rule.target is not RuleTarget.BALL_V_ALPHA:
        raise InvalidParameterError(f"Expected a ball_v_alpha rule, got {rule.target.value}")
    centers, shape = _batch(z)
    nodes = rule.nodes
    n = nodes.shape[-1]
    node_one_minus = one_minus_squared_norm(nodes)
    dv_weights = rule.weights * node_one_minus ** (-rule.alpha) / normalizing_constant(n, rule.alpha)
    node_terms = dv_weights * node_one_minus**b_exp * f(nodes)
    if not np.all(np.isfinite(node_terms)):
        raise InvalidParameterError("Operator S integrand is not finite on the rule nodes")

    kernel = np.abs(1.0 - centers @ np.conj(nodes).T) ** (-(n + 1.0 + a_exp + b_exp))
    values = one_minus_squared_norm(centers) ** a_exp * (kernel @ node_terms)
    return values.reshape(shape)


def _sphere_kernel_average(c: float, n: int, x_sq: np.ndarray) -> np.ndarray:
    # integral over the sphere of |1 - <x, zeta>|^(-c) dsigma(zeta) = 2F1(c/2, c/2; n; |x|^2)
    return hyp2f1(c / 2.0, c / 2.0, n, x_sq)


def operator_s_radial(
    profile: Callable[[np.ndarray], np.ndarray],
    r,
    a_exp: float,
    b_exp: float,
    n: int,
    rule: QuadRule,
) -> np.ndarray:
    """
    S applied to a radial function, evaluated at radii r.

    profile maps the gaps 1 - |w| of a radial_plain rule to f(w); the
    sphere integral is done in closed form, leaving one radial integral.
    """
    if rule.target is not RuleTarget.RADIAL_PLAIN:
        raise InvalidParameterError(f"Expected a radial_plain rule, got {rule.target.value}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    gaps = rule.meta["gaps"]
    rho = rule.nodes
    one_minus_rho_sq = gaps * (2.0 - gaps)
    node_terms = rule.weights * 2 * n * rho ** (2 * n - 1) * one_minus_rho_sq**b_exp * profile(gaps)
    c = n + 1.0 + a_exp + b_exp
    averages = _sphere_kernel_average(c, n, (r[:, None] * rho[None, :]) ** 2)
    return (1.0 - r**2) ** a_exp * (averages @ node_terms)


def j_integral(c: float, alpha: float, z_mag, n: int, rule: QuadRule) -> np.ndarray:
    """J_{c,alpha}(z) = integral of dv_alpha(w) / |1 - <z, w>|^(n+1+alpha+c), reduced to one radial integral."""
    if alpha <= -1.0:
        raise InvalidParameterError(f"J integrals need alpha > -1, got {alpha}")
    z_mag = np.atleast_1d(np.asarray(z_mag, dtype=float))
    gaps = rule.meta["gaps"]
    rho = rule.nodes
    node_terms = rule.weights * 2 * n * rho ** (2 * n - 1) * (gaps * (2.0 - gaps)) ** alpha
    averages = _sphere_kernel_average(n + 1.0 + alpha + c, n, (z_mag[:, None] * rho[None, :]) ** 2)
    return normalizing_constant(n, alpha) * (averages @ node_terms)


def j_integral_closed_form(c: float, alpha: float, z_mag, n: int) -> np.ndarray:
    """J_{c,alpha}(z) = 2F1(s/2, s/2; n + 1 + alpha; |z|^2) with s = n + 1 + alpha + c."""
    s = n + 1.0 + alpha + c
    return hyp2f1(s / 2.0, s / 2.0, n + 1.0 + alpha, np.asarray(z_mag, dtype=float) ** 2)
