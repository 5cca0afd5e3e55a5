import math

from pydantic import BaseModel, ConfigDict, Field


class SpaceParams(BaseModel, use_attribute_docstrings=True):
    """One point of the (n, alpha, p, q, gamma) parameter space"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    """Complex dimension of the ball"""
    alpha: float = 0.0
    """Weight exponent of the measure dv_alpha"""
    p: float = Field(default=2.0, gt=0.0)
    """Integrability exponent of the outer L^p norm"""
    q: float = Field(default=2.0, ge=1.0)
    """Inner exponent of the area, maximal and g-functionals (inf allowed)"""
    gamma: float = Field(default=1.0, gt=0.0)
    """Radius of the Bergman balls D(z, gamma)"""
    b: float | None = None
    """Atom exponent; derived from the atom hypothesis when omitted"""
    k: int = Field(default=0, ge=0)
    """Order of the radial derivative in the generalized norms"""

    def atom_bound(self) -> float:
        """Right-hand side of the atom hypothesis b > n max{1, 1/p} + (alpha+1)/p."""
        return atom_exponent_bound(self.n, self.p, self.alpha)

    def atom_exponent(self, margin: float = 1.0) -> float:
        """The configured atom exponent, or the hypothesis bound plus a margin."""
        return self.b if self.b is not None else self.atom_bound() + margin

    def derivative_order(self) -> int:
        """Smallest N >= 0 with p*N + alpha > -1."""
        return derivative_order(self.p, self.alpha)


def atom_exponent_bound(n: int, p: float, alpha: float) -> float:
    return n * max(1.0, 1.0 / p) + (alpha + 1.0) / p


def derivative_order(p: float, alpha: float) -> int:
    if alpha > -1.0:
        return 0
    # smallest integer N with p*N > -1 - alpha
    order = math.floor((-1.0 - alpha) / p) + 1
    return max(order, 0)
