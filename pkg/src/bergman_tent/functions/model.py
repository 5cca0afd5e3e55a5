"""
Descriptors for the holomorphic test functions and the lattices atoms live on.
"""

from typing import Annotated, Literal, NamedTuple, Tuple, Union

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from bergman_tent.geometry.model import atom_exponent_bound
from bergman_tent.utils import AtomHypothesisError

###################################
# Variants
###################################


class BaseFunctionModel(BaseModel, use_attribute_docstrings=True):
    model_config = ConfigDict(frozen=True)


def _check_interior(center: Tuple[complex, ...]) -> Tuple[complex, ...]:
    if len(center) < 1:
        raise ValueError("center must have at least one coordinate")
    norm = float(np.sqrt(sum(abs(c) ** 2 for c in center)))
    if norm >= 1.0:
        raise ValueError(f"center with |a| = {norm!r} is not in the open unit ball")
    return center


InteriorCenter = Annotated[Tuple[complex, ...], AfterValidator(_check_interior)]


class Monomial(BaseFunctionModel):
    """z^J = z_1^J_1 ... z_n^J_n"""

    kind: Literal["monomial"] = "monomial"
    """Type of the function, always 'monomial'"""
    exponents: Tuple[Annotated[int, Field(ge=0)], ...] = Field(min_length=1)
    """Multi-index J; its length fixes the dimension"""

    @property
    def dim(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)


class KernelPower(BaseFunctionModel):
    """scale * (1 - <z, a>)^(-b)"""

    kind: Literal["kernel_power"] = "kernel_power"
    """Type of the function, always 'kernel_power'"""
    center: InteriorCenter
    """Pole direction a, |a| < 1"""
    b: float
    """Kernel exponent"""
    scale: complex = 1.0
    """Constant multiplier"""

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def coefficient(self) -> complex:
        return self.scale


class Atom(BaseFunctionModel):
    """Normalized kernel power (1 - |a|^2)^((pb - n - 1 - alpha)/p) (1 - <z, a>)^(-b)"""

    kind: Literal["atom"] = "atom"
    """Type of the function, always 'atom'"""
    center: InteriorCenter
    """Atom center a, |a| < 1"""
    b: float
    """Kernel exponent; must satisfy b > n max{1, 1/p} + (alpha+1)/p"""
    p: float = Field(gt=0.0)
    """Integrability exponent the atom is normalized for"""
    alpha: float
    """Weight exponent the atom is normalized for"""

    @model_validator(mode="after")
    def _check_hypothesis(self) -> "Atom":
        check_atom_hypothesis(self.b, self.dim, self.p, self.alpha)
        return self

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def coefficient(self) -> float:
        a_sq = sum(abs(c) ** 2 for c in self.center)
        exponent = (self.p * self.b - self.dim - 1.0 - self.alpha) / self.p
        return (1.0 - a_sq) ** exponent


class Term(BaseFunctionModel):
    """One coefficient-weighted summand of a combination"""

    coefficient: complex
    """Multiplier of the summand"""
    function: "HoloFun"
    """The summand"""


class Combination(BaseFunctionModel):
    """Finite linear combination of other test functions"""

    kind: Literal["combination"] = "combination"
    """Type of the function, always 'combination'"""
    dim: int = Field(ge=1)
    """Complex dimension, needed for the empty (zero) combination"""
    terms: Tuple[Term, ...] = ()
    """Summands; an empty tuple is the zero function"""

    @model_validator(mode="after")
    def _check_dims(self) -> "Combination":
        for term in self.terms:
            if term.function.dim != self.dim:
                raise ValueError(f"term of dimension {term.function.dim} in a combination of dimension {self.dim}")
        return self


HoloFun = Annotated[
    Union[Monomial, KernelPower, Atom, Combination],
    Field(discriminator="kind"),
]

Term.model_rebuild()
Combination.model_rebuild()

HoloFunAdapter = TypeAdapter(HoloFun)


def check_atom_hypothesis(b: float, n: int, p: float, alpha: float) -> None:
    bound = atom_exponent_bound(n, p, alpha)
    if not b > bound:
        raise AtomHypothesisError(b, bound, n, p, alpha)


###################################
# Lattices
###################################


class Lattice(NamedTuple):
    """A delta-separated set of centers in the Bergman metric"""

    centers: np.ndarray
    """Centers of shape (m, n), ordered by |a_k|"""
    separation: float
    """Minimum pairwise Bergman distance delta"""
    r_max: float
    """Euclidean radius the candidate enumeration covers"""
    packing_bound: float
    """Upper bound on the number of delta-separated points within r_max, from tau-volumes"""

    @property
    def size(self) -> int:
        return int(self.centers.shape[0])

    @property
    def n(self) -> int:
        return int(self.centers.shape[-1])

    def truncate(self, size: int) -> "Lattice":
        """The `size` centers closest to the origin."""
        return self._replace(centers=self.centers[:size])
