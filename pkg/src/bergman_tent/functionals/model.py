import enum
from typing import Any, Callable, Dict, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class GVariant(enum.Enum):
    """Which derivative a Littlewood-Paley g-function integrates"""

    RADIAL = "radial"
    """(1 - r)|Rf(rz)| against dr/(1 - r)"""
    GRADIENT = "gradient"
    """(1 - r)|grad f(rz)| against dr/(1 - r)"""
    INVARIANT = "invariant"
    """|grad~ f(rz)| against dr/(1 - r|z|)"""


class Resolution(BaseModel, use_attribute_docstrings=True):
    """Discretization of the functionals; every rule a functional builds derives from it"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    radial: int = Field(default=12, ge=1)
    """Gauss-Legendre points in the hyperbolic radius of each Bergman ball"""
    sphere: int = Field(default=16, ge=8)
    """Sphere-rule size of each Bergman ball"""
    centers_radial: int = Field(default=8, ge=1)
    """Radii of the candidate-center grid of the maximal functionals"""
    centers_angular: int | None = Field(default=None, ge=8)
    """Angular points per candidate radius; 16 for n = 1 and 64 for n >= 2 when unset"""
    segments: int = Field(default=16, ge=4)
    """Gauss points per dyadic panel of the g-function rules"""
    phase_orbit: int | None = Field(default=None, ge=1)
    """Phase-rotation orbit of the sphere samples (n >= 2)"""
    seed: int = 42
    """Seed for all Monte Carlo sphere samples"""

    def angular_for(self, n: int) -> int:
        if self.centers_angular is not None:
            return self.centers_angular
        return 16 if n == 1 else 64

    def doubled(self) -> "Resolution":
        """Every point count doubled, same seed."""
        return self.model_copy(
            update={
                "radial": 2 * self.radial,
                "sphere": 2 * self.sphere,
                "centers_radial": 2 * self.centers_radial,
                "centers_angular": None if self.centers_angular is None else 2 * self.centers_angular,
                "segments": 2 * self.segments,
            }
        )


DEFAULT_RESOLUTION = Resolution()


class PointwiseField(NamedTuple):
    """A nonnegative function on the ball, tagged with the functional that produced it"""

    evaluator: Callable[[np.ndarray], np.ndarray]
    """Maps points of shape (..., n) to values of shape (...)"""
    provenance: Dict[str, Any]
    """Functional name and parameters"""

    def __call__(self, z) -> np.ndarray:
        return self.evaluator(z)
