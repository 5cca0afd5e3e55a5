"""
The golden test family every equivalence experiment runs over.

Configs can append functions through `extra_functions` but never remove
members, so acceptance runs stay comparable across configurations.
"""

from typing import List, NamedTuple

import numpy as np

from bergman_tent.functions import HoloFun, Term, constant, make_atom, monomial
from bergman_tent.functions.model import Combination
from bergman_tent.geometry import SpaceParams
from bergman_tent.quadrature import QuadRule, ball_rule, recenter_rule

RECENTER_THRESHOLD = 0.5
"""Single atoms with |a| at or above this get norm rules recentered at a"""


class FamilyMember(NamedTuple):
    id: str
    function: HoloFun
    boundary: float | None
    """|a| for single atoms; None for functions without a boundary parameter"""
    focus: np.ndarray | None = None
    """Point the norm rules are recentered at"""

    @property
    def is_constant(self) -> bool:
        return self.id == "one"


def _axis(n: int, scale: complex = 1.0) -> tuple:
    return (scale,) + (0.0,) * (n - 1)


def _monomials(n: int, max_degree: int) -> List[FamilyMember]:
    members = []
    for degree in range(1, max_degree + 1):
        exponents = (degree,) + (0,) * (n - 1)
        members.append(FamilyMember(f"z^{exponents}", monomial(*exponents), None))
    if n >= 2:
        mixed = [(1, 1)] + ([(2, 2)] if max_degree >= 4 else [])
        for pair in mixed:
            exponents = pair + (0,) * (n - 2)
            members.append(FamilyMember(f"z^{exponents}", monomial(*exponents), None))
    return members


def golden_family(
    params: SpaceParams,
    atom_radii: List[float],
    max_degree: int = 4,
    extra: List[HoloFun] | None = None,
    include_constant: bool = True,
) -> List[FamilyMember]:
    """Constant, single atoms along e_1, monomials up to max_degree, two fixed atomic combinations."""
    n = params.n
    b = params.atom_exponent()
    members = [FamilyMember("one", constant(n), None)] if include_constant else []

    for radius in atom_radii:
        atom = make_atom(_axis(n, radius), b, params.p, params.alpha)
        focus = np.array(_axis(n, radius), dtype=complex) if radius >= RECENTER_THRESHOLD else None
        members.append(FamilyMember(f"atom|a|={radius:g}", atom, radius, focus))

    members.extend(_monomials(n, max_degree))

    pair = Combination(
        dim=n,
        terms=(
            Term(coefficient=1.0, function=make_atom(_axis(n, 0.5), b, params.p, params.alpha)),
            Term(coefficient=-0.5, function=make_atom(_axis(n, -0.5), b, params.p, params.alpha)),
        ),
    )
    rotated = Combination(
        dim=n,
        terms=(
            Term(coefficient=1.0, function=make_atom(_axis(n, 0.9), b, params.p, params.alpha)),
            Term(coefficient=1j, function=make_atom(_axis(n, 0.9j), b, params.p, params.alpha)),
        ),
    )
    members.append(FamilyMember("combo:pair", pair, None))
    members.append(FamilyMember("combo:rotated", rotated, None))

    for i, function in enumerate(extra or []):
        if function.dim == n:
            members.append(FamilyMember(f"extra:{i}", function, None))
    return members


def norm_rule(
    member: FamilyMember,
    n: int,
    alpha: float,
    radial: int,
    sphere: int,
    seed: int,
) -> QuadRule:
    """dv_alpha rule for the member's L^p norms, recentered at its focus when it has one."""
    rule = ball_rule(n, alpha, radial, sphere, seed)
    if member.focus is not None:
        rule = recenter_rule(rule, member.focus)
    return rule
