"""
Closed-form evaluation of the holomorphic test functions and their derivatives,
plus Bergman-metric lattices and atomic synthesis.
"""

import logging
import math
from typing import Sequence

import numpy as np
from scipy.special import poch, stirling2

from bergman_tent.functions.model import (
    Atom,
    Combination,
    HoloFun,
    HoloFunAdapter,
    KernelPower,
    Lattice,
    Monomial,
    Term,
    check_atom_hypothesis,
)
from bergman_tent.geometry import as_point, bergman_distance, require_interior, tau_ball_volume
from bergman_tent.utils import DimensionMismatchError, InvalidParameterError, one_minus_squared_norm, squared_norm

__all__ = [
    "Atom",
    "Combination",
    "HoloFun",
    "HoloFunAdapter",
    "KernelPower",
    "Lattice",
    "Monomial",
    "Term",
    "build_lattice",
    "constant",
    "evaluate",
    "gradient",
    "invariant_gradient_norm",
    "make_atom",
    "minus_value_at_origin",
    "monomial",
    "radial_derivative",
    "scaled",
    "synthesize_atomic",
    "zero",
]

logger = logging.getLogger(__name__)

DEFAULT_SHELL_CAP = 256
COVER_SAMPLES = 20000
COVER_ROUNDS = 8
DISTANCE_CHUNK = 1024


###################################
# Constructors
###################################


def monomial(*exponents: int) -> Monomial:
    return Monomial(exponents=exponents)


def constant(dim: int, value: complex = 1.0) -> Combination:
    return Combination(dim=dim, terms=(Term(coefficient=value, function=Monomial(exponents=(0,) * dim)),))


def zero(dim: int) -> Combination:
    return Combination(dim=dim)


def scaled(f: HoloFun, factor: complex) -> Combination:
    return Combination(dim=f.dim, terms=(Term(coefficient=factor, function=f),))


def make_atom(center, b: float, p: float, alpha: float) -> Atom:
    """Build an atom, raising AtomHypothesisError when b is too small."""
    center = tuple(complex(c) for c in np.atleast_1d(np.asarray(center, dtype=complex)))
    check_atom_hypothesis(b, len(center), p, alpha)
    return Atom(center=center, b=b, p=p, alpha=alpha)


def minus_value_at_origin(f: HoloFun) -> Combination:
    """f - f(0)."""
    at_origin = complex(evaluate(f, np.zeros(f.dim)))
    return Combination(
        dim=f.dim,
        terms=(
            Term(coefficient=1.0, function=f),
            Term(coefficient=-at_origin, function=Monomial(exponents=(0,) * f.dim)),
        ),
    )


###################################
# Evaluation
###################################


def _prepare(f: HoloFun, z) -> np.ndarray:
    z = as_point(z)
    if z.shape[-1] != f.dim:
        raise DimensionMismatchError(f.dim, z.shape[-1])
    require_interior(z)
    return z


def _pairing(f: KernelPower | Atom, z: np.ndarray) -> np.ndarray:
    # w = <z, a>
    center = np.asarray(f.center, dtype=complex)
    return np.sum(z * np.conj(center), axis=-1)


def _value(f: HoloFun, z: np.ndarray) -> np.ndarray:
    match f:
        case Monomial(exponents=exponents):
            return np.prod(z ** np.array(exponents), axis=-1)
        case KernelPower() | Atom():
            return f.coefficient * (1.0 - _pairing(f, z)) ** (-f.b)
        case Combination(terms=terms):
            out = np.zeros(z.shape[:-1], dtype=complex)
            for term in terms:
                out = out + term.coefficient * _value(term.function, z)
            return out


def _gradient(f: HoloFun, z: np.ndarray) -> np.ndarray:
    match f:
        case Monomial(exponents=exponents):
            J = np.array(exponents)
            grad = np.zeros(z.shape, dtype=complex)
            for k in range(f.dim):
                if J[k] == 0:
                    continue
                lowered = J.copy()
                lowered[k] -= 1
                grad[..., k] = J[k] * np.prod(z**lowered, axis=-1)
            return grad
        case KernelPower() | Atom():
            center = np.asarray(f.center, dtype=complex)
            factor = f.coefficient * f.b * (1.0 - _pairing(f, z)) ** (-f.b - 1.0)
            return factor[..., None] * np.conj(center)
        case Combination(terms=terms):
            out = np.zeros(z.shape, dtype=complex)
            for term in terms:
                out = out + term.coefficient * _gradient(term.function, z)
            return out


def _radial(f: HoloFun, z: np.ndarray, order: int) -> np.ndarray:
    if order == 0:
        return _value(f, z)
    match f:
        case Monomial():
            return f.degree**order * _value(f, z)
        case KernelPower() | Atom():
            # R acts as w d/dw on functions of w = <z, a>, and
            # (w d/dw)^k = sum_j S(k, j) w^j (d/dw)^j with S the Stirling numbers of the second kind
            w = _pairing(f, z)
            total = np.zeros(z.shape[:-1], dtype=complex)
            for j in range(1, order + 1):
                total = total + stirling2(order, j, exact=True) * poch(f.b, j) * w**j * (1.0 - w) ** (-f.b - j)
            return f.coefficient * total
        case Combination(terms=terms):
            out = np.zeros(z.shape[:-1], dtype=complex)
            for term in terms:
                out = out + term.coefficient * _radial(term.function, z, order)
            return out


def evaluate(f: HoloFun, z) -> np.ndarray:
    """f(z) for a point or a batch of points."""
    return _value(f, _prepare(f, z))


def gradient(f: HoloFun, z) -> np.ndarray:
    """Complex gradient (df/dz_1, ..., df/dz_n), same shape as z."""
    return _gradient(f, _prepare(f, z))


def radial_derivative(f: HoloFun, z, order: int = 1) -> np.ndarray:
    """R^k f(z) with R = sum z_k d/dz_k."""
    if order < 0:
        raise InvalidParameterError(f"Derivative order must be >= 0, got {order}")
    return _radial(f, _prepare(f, z), order)


def invariant_gradient_norm(f: HoloFun, z) -> np.ndarray:
    """
    |grad~ f(z)| = sqrt((1 - |z|^2)(|grad f|^2 - |Rf|^2)).

    The difference |grad f|^2 - |Rf|^2 is formed through the Lagrange identity
    (1 - |z|^2)|v|^2 + sum_{j<k} |z_j v_k - z_k v_j|^2, which is a sum of
    nonnegative terms and stays accurate near the sphere.
    """
    z = _prepare(f, z)
    v = _gradient(f, z)
    one_minus = one_minus_squared_norm(z)
    cross = z[..., :, None] * v[..., None, :] - z[..., None, :] * v[..., :, None]
    # every unordered pair appears twice
    pairs = 0.5 * np.sum(np.abs(cross) ** 2, axis=(-2, -1))
    radicand = one_minus * (one_minus * squared_norm(v) + pairs)
    return np.sqrt(np.maximum(radicand, 0.0))


###################################
# Lattices and atomic synthesis
###################################


def _shell_points(n: int, rho: float, delta: float, rng: np.random.Generator, cap: int, shell: int) -> np.ndarray:
    r = math.tanh(rho)
    # Bergman length of the circle of hyperbolic radius rho is pi sinh(2 rho)
    per_circle = math.ceil(math.pi * math.sinh(2.0 * rho) / (delta / 2.0))
    if n == 1:
        offset = 0.5 * (shell % 2)
        angles = 2.0 * np.pi * (np.arange(per_circle) + offset) / per_circle
        return r * np.exp(1j * angles)[:, None]
    count = min(cap, per_circle ** (2 * n - 1))
    gauss = rng.standard_normal((count, 2 * n))
    directions = gauss[:, :n] + 1j * gauss[:, n:]
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return r * directions


def _distance_to_set(centers: np.ndarray, points: np.ndarray) -> np.ndarray:
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], DISTANCE_CHUNK):
        chunk = points[start : start + DISTANCE_CHUNK]
        out[start : start + DISTANCE_CHUNK] = np.min(bergman_distance(centers[:, None, :], chunk[None, :, :]), axis=0)
    return out


def _fill_gaps(accepted: list, n: int, delta: float, rho_max: float, rng: np.random.Generator) -> None:
    """Add every random point farther than delta from all centers until a whole batch adds none."""
    for _ in range(COVER_ROUNDS):
        gauss = rng.standard_normal((COVER_SAMPLES, 2 * n))
        directions = gauss[:, :n] + 1j * gauss[:, n:]
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
        candidates = np.tanh(rho_max * rng.uniform(size=(COVER_SAMPLES, 1))) * directions
        added = 0
        for candidate in candidates[_distance_to_set(np.array(accepted), candidates) >= delta]:
            if np.min(bergman_distance(np.array(accepted), candidate)) >= delta:
                accepted.append(candidate)
                added += 1
        if not added:
            return
        logger.debug(f"Lattice gap filling added {added} centers")
    logger.warning(f"Lattice n={n} delta={delta}: random points still found gaps after {COVER_ROUNDS} rounds")


def build_lattice(
    n: int,
    delta: float,
    r_max: float,
    seed: int = 42,
    shell_cap: int = DEFAULT_SHELL_CAP,
) -> Lattice:
    """
    Greedy maximal delta-separated set among deterministic candidates.

    Candidates sit on shells at Bergman radii m*delta/2 up to artanh(r_max):
    equiangular points for n = 1, at most `shell_cap` seeded sphere samples
    per shell for n >= 2. The origin is always the first center. For n >= 2
    seeded random points then fill any gap left by the capped shells, so every point
    with |z| <= r_max lies within 2*delta of a center.
    """
    if not 0.0 < delta <= 1.0:
        raise InvalidParameterError(f"Lattice separation must lie in (0, 1], got {delta}")
    if not 0.0 < r_max < 1.0:
        raise InvalidParameterError(f"Lattice radius must lie in (0, 1), got {r_max}")
    if n < 1:
        raise InvalidParameterError(f"Dimension must be >= 1, got {n}")

    rho_max = math.atanh(r_max)
    step = delta / 2.0
    radii = [m * step for m in range(1, int(rho_max / step) + 1)]
    if not radii or radii[-1] < rho_max:
        radii.append(rho_max)

    rng = np.random.default_rng(seed)
    accepted = [np.zeros(n, dtype=complex)]
    for shell, rho in enumerate(radii, start=1):
        for candidate in _shell_points(n, rho, delta, rng, shell_cap, shell):
            if np.min(bergman_distance(np.array(accepted), candidate)) >= delta:
                accepted.append(candidate)
    if n > 1:
        _fill_gaps(accepted, n, delta, rho_max, rng)

    centers = np.array(accepted)
    order = np.argsort(squared_norm(centers), kind="stable")
    packing_bound = tau_ball_volume(n, rho_max + step) / tau_ball_volume(n, step)
    logger.debug(
        f"Lattice n={n} delta={delta} r_max={r_max}: {centers.shape[0]} centers, packing bound {packing_bound:.1f}"
    )
    return Lattice(centers[order], delta, r_max, packing_bound)


def synthesize_atomic(
    coeffs: Sequence[complex],
    lattice: Lattice,
    b: float,
    p: float,
    alpha: float,
) -> Combination:
    """sum_k c_k (1 - |a_k|^2)^((pb - n - 1 - alpha)/p) (1 - <z, a_k>)^(-b) over the lattice."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape[0] > lattice.size:
        raise InvalidParameterError(f"{coeffs.shape[0]} coefficients for a lattice of {lattice.size} centers")
    check_atom_hypothesis(b, lattice.n, p, alpha)
    terms = tuple(
        Term(
            coefficient=complex(c),
            function=Atom(center=tuple(complex(x) for x in center), b=b, p=p, alpha=alpha),
        )
        for c, center in zip(coeffs, lattice.centers)
        if c != 0
    )
    return Combination(dim=lattice.n, terms=terms)
