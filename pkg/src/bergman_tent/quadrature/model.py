import enum
from typing import Any, Dict, NamedTuple

import numpy as np


class RuleTarget(enum.Enum):
    """The measure a quadrature rule discretizes"""

    BALL_V_ALPHA = "ball_v_alpha"
    """Weighted volume dv_alpha on the ball"""
    SPHERE_SIGMA = "sphere_sigma"
    """Normalized surface measure on the unit sphere"""
    BERGMAN_BALL_TAU = "bergman_ball_tau"
    """Invariant measure restricted to a Bergman ball D(center, gamma)"""
    RADIAL_SINGULAR = "radial_singular"
    """dr/(1-r) or dr/(1-r|z|) on (0, 1)"""
    RADIAL_PLAIN = "radial_plain"
    """Lebesgue measure dr on (0, 1)"""


class ErrorMethod(enum.Enum):
    """How the error estimate of an integral was obtained"""

    NESTED_RULE_DIFFERENCE = "nested_rule_difference"
    """Difference against the same rule at half resolution"""
    MC_STANDARD_ERROR = "mc_standard_error"
    """Standard error of the mean over independent samples"""
    UNAVAILABLE = "unavailable"
    """No estimate: node values were given without a callable for the companion rule"""


class QuadRule(NamedTuple):
    """Immutable node/weight list for one target measure"""

    nodes: np.ndarray
    """Points of shape (m, n) for ball/sphere rules, radii of shape (m,) for radial rules"""
    weights: np.ndarray
    """Positive finite weights of shape (m,)"""
    target: RuleTarget
    """The measure the weights discretize"""
    meta: Dict[str, Any]
    """Construction parameters (resolution, seed, alpha, gamma, ...)"""
    sample_ids: np.ndarray | None = None
    """Monte Carlo sample each node belongs to; None for deterministic rules"""
    coarse: "QuadRule | None" = None
    """Half-resolution companion used for nested error estimates"""

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def alpha(self) -> float:
        """Weight exponent of a ball_v_alpha rule."""
        return float(self.meta.get("alpha", 0.0))

    @property
    def stochastic(self) -> bool:
        return self.sample_ids is not None


class ErrorEstimate(NamedTuple):
    """An integral value together with an estimate of its error"""

    value: float | complex
    """Quadrature value"""
    abs_err: float
    """Nonnegative absolute error estimate; NaN when the method is UNAVAILABLE"""
    method: ErrorMethod
    """How abs_err was obtained"""
