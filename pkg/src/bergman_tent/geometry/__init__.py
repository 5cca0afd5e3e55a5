"""
Möbius-invariant geometry of the unit ball in C^n.

Points are numpy complex arrays whose last axis has length n; every function
broadcasts over the leading axes.
"""

import logging
import math

import numpy as np
from scipy.special import gammaln

from bergman_tent.geometry.model import SpaceParams, atom_exponent_bound, derivative_order
from bergman_tent.utils import (
    DimensionMismatchError,
    InvalidParameterError,
    NotInteriorError,
    one_minus_squared_norm,
    squared_norm,
)

__all__ = [
    "MobiusMap",
    "SpaceParams",
    "as_point",
    "atom_exponent_bound",
    "bergman_distance",
    "density_tau",
    "density_v_alpha",
    "derivative_order",
    "in_ball",
    "inner",
    "mobius_apply",
    "mobius_transform",
    "normalizing_constant",
    "pseudo_distance",
    "require_interior",
    "tau_ball_volume",
]

logger = logging.getLogger(__name__)


def as_point(coords) -> np.ndarray:
    """Convert coordinates to a complex array of shape (..., n)."""
    z = np.asarray(coords, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.shape[-1] < 1:
        raise DimensionMismatchError(1, 0)
    return z


def _check_dimensions(*points: np.ndarray) -> int:
    n = points[0].shape[-1]
    for point in points[1:]:
        if point.shape[-1] != n:
            raise DimensionMismatchError(n, point.shape[-1])
    return n


def require_interior(z: np.ndarray) -> None:
    """Raise NotInteriorError unless every point has |z| < 1."""
    sq = squared_norm(z)
    if np.any(sq >= 1.0):
        raise NotInteriorError(float(np.sqrt(np.max(sq))))


def inner(z, w) -> np.ndarray:
    """Hermitian inner product <z, w> = sum z_k conj(w_k)."""
    z = as_point(z)
    w = as_point(w)
    _check_dimensions(z, w)
    return np.sum(z * np.conj(w), axis=-1)


def mobius_transform(a, z) -> np.ndarray:
    """
    The involutive automorphism phi_a applied to z, broadcasting over both.

    phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>) with P_a the projection
    onto span{a}, Q_a = I - P_a and s_a = sqrt(1 - |a|^2); phi_0 = -identity.
    """
    a = as_point(a)
    z = as_point(z)
    _check_dimensions(a, z)
    require_interior(z)
    require_interior(a)

    za = np.sum(z * np.conj(a), axis=-1)
    # Same arithmetic as za so that P_a a == a exactly
    aa = np.sum(a * np.conj(a), axis=-1).real
    s = np.sqrt(one_minus_squared_norm(a))

    safe_aa = np.where(aa > 0.0, aa, 1.0)
    coeff = np.where(aa > 0.0, za / safe_aa, 0.0)
    proj = coeff[..., None] * a
    perp = z - proj
    numerator = a - proj - s[..., None] * perp
    return numerator / (1.0 - za)[..., None]


class MobiusMap:
    """The automorphism phi_a of the ball, with its center data cached"""

    def __init__(self, center):
        center = as_point(center)
        if center.ndim != 1:
            raise InvalidParameterError("MobiusMap center must be a single point")
        require_interior(center)
        self.center = center
        """Center a; phi_a swaps 0 and a"""
        self.n = center.shape[-1]
        """Complex dimension"""
        self.one_minus_sq = float(one_minus_squared_norm(center))
        """1 - |a|^2"""
        self.s = math.sqrt(self.one_minus_sq)
        """sqrt(1 - |a|^2)"""

    def apply(self, z) -> np.ndarray:
        """phi_a(z) for a single point or a batch of points."""
        return mobius_transform(self.center, z)

    def __call__(self, z) -> np.ndarray:
        return self.apply(z)

    def one_minus_sq_image(self, z) -> np.ndarray:
        """1 - |phi_a(z)|^2 via (1 - |a|^2)(1 - |z|^2) / |1 - <z, a>|^2."""
        z = as_point(z)
        za = inner(z, self.center)
        return self.one_minus_sq * one_minus_squared_norm(z) / np.abs(1.0 - za) ** 2

    def __repr__(self) -> str:
        return f"MobiusMap(center={self.center!r})"


def mobius_apply(m: MobiusMap, z) -> np.ndarray:
    return m.apply(z)


def pseudo_distance(z, w) -> np.ndarray:
    """|phi_z(w)|, symmetrized so that swapping the arguments is exact."""
    z = as_point(z)
    w = as_point(w)
    forward = np.sqrt(squared_norm(mobius_transform(z, w)))
    backward = np.sqrt(squared_norm(mobius_transform(w, z)))
    return 0.5 * (forward + backward)


def bergman_distance(z, w) -> np.ndarray:
    """beta(z, w) = artanh |phi_z(w)|."""
    z = as_point(z)
    w = as_point(w)
    x = pseudo_distance(z, w)
    # 1 - |phi_z(w)|^2 from the magnitude identity, symmetric in (z, w)
    zw = np.abs(1.0 - inner(z, w)) ** 2
    one_minus_x2 = one_minus_squared_norm(z) * one_minus_squared_norm(w) / zw
    one_minus_x2 = np.minimum(one_minus_x2, 1.0)
    return np.maximum(np.log1p(x) - 0.5 * np.log(one_minus_x2), 0.0)


def in_ball(w, center, gamma: float) -> np.ndarray:
    """Membership of w in the Bergman ball D(center, gamma)."""
    if gamma <= 0.0:
        raise InvalidParameterError(f"Bergman radius must be positive, got {gamma}")
    return pseudo_distance(center, w) < math.tanh(gamma)


def normalizing_constant(n: int, alpha: float) -> float:
    """c_alpha = Gamma(n+alpha+1) / (n! Gamma(alpha+1)) for alpha > -1, else 1."""
    if alpha <= -1.0:
        return 1.0
    return math.exp(gammaln(n + alpha + 1.0) - gammaln(n + 1.0) - gammaln(alpha + 1.0))


def density_v_alpha(z, alpha: float) -> np.ndarray:
    """Density c_alpha (1 - |z|^2)^alpha of v_alpha against normalized volume."""
    z = as_point(z)
    require_interior(z)
    n = z.shape[-1]
    return normalizing_constant(n, alpha) * one_minus_squared_norm(z) ** alpha


def density_tau(z) -> np.ndarray:
    """Density (1 - |z|^2)^-(n+1) of the invariant measure."""
    z = as_point(z)
    require_interior(z)
    n = z.shape[-1]
    return one_minus_squared_norm(z) ** (-(n + 1.0))


def tau_ball_volume(n: int, gamma: float) -> float:
    """tau(D(z, gamma)) = sinh(gamma)^(2n), independent of z."""
    return math.sinh(gamma) ** (2 * n)
