"""
This module defines the experiment configurations and the report records.
"""

import itertools
import math
from typing import Any, Dict, List, NamedTuple, Tuple

from pydantic import BaseModel, ConfigDict, Field

from bergman_tent.functionals.model import Resolution
from bergman_tent.functions.model import HoloFun
from bergman_tent.geometry.model import SpaceParams, atom_exponent_bound

###################################
# Configurations
###################################

DESK_RESOLUTION = Resolution(radial=6, sphere=8, centers_radial=3, centers_angular=8, segments=8)


class Cell(NamedTuple):
    """One point of an experiment's parameter grid"""

    id: str
    params: SpaceParams
    extra: Dict[str, float] = {}
    """Parameters outside SpaceParams, e.g. the lattice separation"""


def cell_id(params: SpaceParams, with_k: bool = False) -> str:
    text = f"n={params.n} p={params.p:g} q={params.q:g} alpha={params.alpha:g} gamma={params.gamma:g}"
    return f"{text} k={params.k}" if with_k else text


class ExperimentConfig(BaseModel, use_attribute_docstrings=True):
    """Settings shared by every experiment"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 42
    """Seed for every Monte Carlo rule and random sample"""
    resolution: Resolution = DESK_RESOLUTION
    """Discretization of the pointwise functionals"""
    norm_radial: int = Field(default=8, ge=1)
    """Radial Gauss-Jacobi points of the outer L^p norm rules"""
    norm_sphere: int = Field(default=16, ge=8)
    """Sphere-rule size of the outer L^p norm rules"""
    spread_limit: float = Field(default=1e3, gt=1.0)
    """Largest allowed max/min ratio within one configuration"""
    slope_limit: float = Field(default=0.1, gt=0.0)
    """Largest allowed |slope| of log-ratio against -log(1 - |a|)"""
    convergence_tol: float = Field(default=0.005, gt=0.0)
    """Relative change under resolution doubling above which a value is flagged unconverged"""
    check_convergence: bool = True
    """Recompute every value at doubled resolution"""

    def cells(self) -> List[Cell]:
        return []

    def violations(self) -> List[str]:
        """Precondition violations of the grid, as human-readable lines."""
        return []


class FamilyGridConfig(ExperimentConfig):
    """Grid over (n, p, q, alpha, gamma) driving the golden test family"""

    n: List[int] = [1]
    """Complex dimensions"""
    p: List[float] = [2.0]
    """Outer integrability exponents"""
    q: List[float] = [2.0]
    """Inner exponents of the functionals"""
    alpha: List[float] = [0.0]
    """Weight exponents"""
    gamma: List[float] = [0.5, 1.0]
    """Bergman radii"""
    b: float | None = None
    """Atom exponent; the hypothesis bound plus one when unset"""
    atom_radii: List[float] = [0.0, 0.5, 0.9, 0.99]
    """|a| of the family's single atoms"""
    max_degree: int = Field(default=4, ge=1)
    """Highest monomial degree in the family"""
    extra_functions: List[HoloFun] = []
    """Functions appended to the golden family"""

    def grid(self) -> List[SpaceParams]:
        return [
            SpaceParams(n=n, p=p, q=q, alpha=alpha, gamma=gamma, b=self.b)
            for n, p, q, alpha, gamma in itertools.product(self.n, self.p, self.q, self.alpha, self.gamma)
        ]

    def cells(self) -> List[Cell]:
        return [Cell(cell_id(params), params) for params in self.grid()]

    def violations(self) -> List[str]:
        out = []
        for cell in self.cells():
            params = cell.params
            if params.alpha <= -1.0:
                out.append(f"{cell.id}: alpha > -1 is required, got {params.alpha:g}")
            if math.isinf(params.q):
                out.append(f"{cell.id}: q must be finite")
            if self.b is not None and not self.b > params.atom_bound():
                out.append(
                    f"{cell.id}: atom exponent b={self.b:g} violates b > n*max(1, 1/p) + (alpha+1)/p"
                    f" = {params.atom_bound():g}"
                )
        for radius in self.atom_radii:
            if not 0.0 <= radius < 1.0:
                out.append(f"atom radius {radius:g} is not in [0, 1)")
        for extra in self.extra_functions:
            if extra.dim not in self.n:
                out.append(f"extra function of dimension {extra.dim} matches no grid dimension")
        return out


class TentEquivalenceConfig(FamilyGridConfig):
    """Area and maximal norms against the Bergman norm"""

    sandwich_radii: List[float] = [0.0, 0.5, 0.9, 0.99]
    """|z| of the pointwise sandwich checks"""


class GFunctionConfig(FamilyGridConfig):
    """g-function norms against ||f - f(0)||"""

    def violations(self) -> List[str]:
        out = super().violations()
        for cell in self.cells():
            if not 1.0 < cell.params.q < math.inf:
                out.append(f"{cell.id}: g-functions need q in (1, inf), got {cell.params.q:g}")
        return out


class BesovConfig(FamilyGridConfig):
    """Derivative area and maximal norms against the generalized Bergman norm"""

    k: List[int] = [0, 1]
    """Radial derivative orders"""
    hardy_sobolev_s: List[float] = [0.25, 0.5]
    """Smoothness s of the extra cells alpha = -2s - 1, p = 2"""
    hardy: bool = True
    """Add the alpha = -1, p = 2, k = 1 cells"""

    def grid(self) -> List[SpaceParams]:
        cells = [
            SpaceParams(n=n, p=p, q=q, alpha=alpha, gamma=gamma, b=self.b, k=k)
            for n, p, q, alpha, gamma, k in itertools.product(
                self.n, self.p, self.q, self.alpha, self.gamma, self.k
            )
        ]
        extra_alphas = [-2.0 * s - 1.0 for s in self.hardy_sobolev_s]
        if self.hardy:
            extra_alphas.append(-1.0)
        for n, q, gamma, alpha in itertools.product(self.n, self.q, self.gamma, extra_alphas):
            cells.append(SpaceParams(n=n, p=2.0, q=q, alpha=alpha, gamma=gamma, b=self.b, k=1))
        return cells

    def cells(self) -> List[Cell]:
        return [Cell(cell_id(params, with_k=True), params) for params in self.grid()]

    def violations(self) -> List[str]:
        out = []
        for cell in self.cells():
            params = cell.params
            if not params.p * params.k + params.alpha > -1.0:
                out.append(f"{cell.id}: p*k + alpha > -1 is required, got {params.p * params.k + params.alpha:g}")
            if math.isinf(params.q):
                out.append(f"{cell.id}: q must be finite")
            if self.b is not None and not self.b > params.atom_bound():
                out.append(
                    f"{cell.id}: atom exponent b={self.b:g} violates b > n*max(1, 1/p) + (alpha+1)/p"
                    f" = {params.atom_bound():g}"
                )
        return out


class WeakTypeConfig(ExperimentConfig):
    """Level-set measure of the maximal function of boundary bumps"""

    n: List[int] = [1]
    """Complex dimensions"""
    alpha: List[float] = [0.0]
    """Weight exponents"""
    gamma: List[float] = [1.0]
    """Bergman radii"""
    bump_radii: List[float] = [0.0, 0.5, 0.9, 0.99]
    """|a| of the bump family |atom_a| (atoms normalized for p = 1)"""
    lambda_count: int = Field(default=24, ge=2)
    """Points of the logarithmic lambda grid written to the report"""

    def cells(self) -> List[Cell]:
        return [
            Cell(cell_id(params), params)
            for params in (
                SpaceParams(n=n, p=1.0, q=1.0, alpha=alpha, gamma=gamma)
                for n, alpha, gamma in itertools.product(self.n, self.alpha, self.gamma)
            )
        ]

    def violations(self) -> List[str]:
        return [f"{cell.id}: alpha > -1 is required" for cell in self.cells() if cell.params.alpha <= -1.0]


class EstimateSuiteConfig(ExperimentConfig):
    """Auxiliary estimates of the ball geometry and kernel integrals"""

    n: List[int] = [1, 2]
    """Complex dimensions"""
    alpha: List[float] = [0.0, 1.0]
    """Weight exponents"""
    gamma: List[float] = [1.0]
    """Bergman radii"""
    c: List[float] = [0.5, 1.0, 2.0]
    """Exponents c of the kernel integrals J_{c, alpha}"""
    radii: List[float] = [0.0, 0.5, 0.9, 0.99]
    """|z| levels of the boundedness protocols"""
    samples: int = Field(default=200, ge=10)
    """Random pairs per level"""
    comparability_slope_limit: float = 0.05
    """Largest allowed slope of log-spread against -log(1 - |a|)"""
    kernel_gaps: List[float] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
    """1 - |z| values of the kernel-integral stabilization check"""
    stabilization_tol: float = 0.05
    """Largest relative change of J (1 - |z|^2)^c over the last decade"""
    operator_triples: List[Tuple[float, float, float, float]] = [(2.0, 0.0, 0.0, 0.0), (2.0, 0.0, -1.0, 0.0)]
    """(p, t, a, b) parameter triples of the S-operator check"""
    shell_levels: int = Field(default=8, ge=5)
    """Dyadic shells 1..levels of the S-operator test family"""
    kernel_betas: List[float] = [1.5]
    """Kernel exponents of the invariant-gradient kernel bound"""
    grid_points: int = Field(default=201, ge=11)
    """Grid points per axis of the |1 - t lambda| comparison"""

    def cells(self) -> List[Cell]:
        return [
            Cell(cell_id(params), params)
            for params in (
                SpaceParams(n=n, alpha=alpha, gamma=gamma)
                for n, alpha, gamma in itertools.product(self.n, self.alpha, self.gamma)
            )
        ]

    def violations(self) -> List[str]:
        out = [f"{cell.id}: alpha > -1 is required" for cell in self.cells() if cell.params.alpha <= -1.0]
        out += [f"kernel exponent c={c:g} must be positive" for c in self.c if c <= 0.0]
        return out


def _coordinate(c: complex) -> str:
    c = complex(c)
    return f"{c.real:g}" if c.imag == 0.0 else f"{c.real:g}{c.imag:+g}j"


class CounterexampleConfig(ExperimentConfig):
    """Divergence of the invariant g-function under the dr/(1 - r) weight"""

    points: List[Tuple[complex, complex]] = [(0.5, 0.0), (0.3, 0.4), (0.0, 0.0)]
    """Points z in C^2 along which f = z_1 is integrated"""
    eps_exponents: List[int] = list(range(8, 26, 2))
    """m of the truncations epsilon = 2^-m"""
    segments: int = Field(default=16, ge=4)
    """Gauss points per dyadic panel"""
    slope_tol: float = 0.05
    """Relative tolerance on the divergence slope"""
    weighted_tol: float = 1e-6
    """Largest change of the convergent integral under resolution doubling"""

    def cells(self) -> List[Cell]:
        return [
            Cell(
                f"z=({_coordinate(point[0])}, {_coordinate(point[1])})",
                SpaceParams(n=2, q=2.0),
                {"index": float(i)},
            )
            for i, point in enumerate(self.points)
        ]

    def violations(self) -> List[str]:
        out = []
        for point in self.points:
            if abs(point[0]) ** 2 + abs(point[1]) ** 2 >= 1.0:
                out.append(f"point {point} is not in the open unit ball")
        if len(self.eps_exponents) < 3:
            out.append("at least three truncations are needed for the slope regression")
        return out


class AtomicBoundConfig(ExperimentConfig):
    """One-sided bound of atomic sums by their coefficients"""

    n: List[int] = [1]
    """Complex dimensions"""
    p: List[float] = [0.5, 1.0, 2.0]
    """Integrability exponents"""
    alpha: List[float] = [0.0]
    """Weight exponents"""
    b: float | None = None
    """Atom exponent; the hypothesis bound plus one when unset"""
    delta: List[float] = [0.25, 0.5, 1.0]
    """Lattice separations"""
    sizes: List[int] = [8, 32, 128]
    """Lattice truncation sizes"""
    r_max: float = 0.95
    """Radius of the lattice enumeration"""
    trials: int = Field(default=3, ge=1)
    """Random coefficient vectors per lattice size"""
    norm_radial: int = Field(default=24, ge=1)
    """Radial points of the norm rule"""
    norm_sphere: int = Field(default=128, ge=8)
    """Sphere-rule size of the norm rule"""

    def cells(self) -> List[Cell]:
        return [
            Cell(
                f"n={n} p={p:g} alpha={alpha:g} delta={delta:g}",
                SpaceParams(n=n, p=p, alpha=alpha, b=self.b),
                {"delta": delta},
            )
            for n, p, alpha, delta in itertools.product(self.n, self.p, self.alpha, self.delta)
        ]

    def violations(self) -> List[str]:
        out = []
        for cell in self.cells():
            params = cell.params
            if params.alpha <= -1.0:
                out.append(f"{cell.id}: alpha > -1 is required")
            if self.b is not None and not self.b > params.atom_bound():
                out.append(
                    f"{cell.id}: atom exponent b={self.b:g} violates b > n*max(1, 1/p) + (alpha+1)/p"
                    f" = {atom_exponent_bound(params.n, params.p, params.alpha):g}"
                )
            if not 0.0 < cell.extra["delta"] <= 1.0:
                out.append(f"{cell.id}: lattice separation must lie in (0, 1]")
        if not 0.0 < self.r_max < 1.0:
            out.append(f"lattice radius {self.r_max:g} is not in (0, 1)")
        return out


###################################
# Reports
###################################


class Record(BaseModel):
    """One CSV row: a single metric of one function in one grid cell"""

    experiment: str
    cell: str
    function: str
    metric: str
    value: float
    converged: bool = True
    """False when resolution doubling moved the value by more than the tolerance"""
    regime: str = ""
    """'q1' for rows computed in the q = 1 regime"""


class Verdict(BaseModel):
    """Outcome of one assertion"""

    name: str
    """Assertion name, e.g. band:area_over_bergman"""
    cell: str
    """Grid cell the assertion ran on, or 'all'"""
    passed: bool
    statistics: Dict[str, float] = {}
    """min/max/spread, slope and its standard error, ..."""
    detail: str = ""


class CellResult(NamedTuple):
    records: List[Record]
    verdicts: List[Verdict]
    notes: List[str]


class ExperimentReport(BaseModel):
    """Everything one experiment produced"""

    experiment: str
    seed: int
    config: Dict[str, Any]
    """The validated configuration, as written to the summary"""
    records: List[Record] = []
    verdicts: List[Verdict] = []
    notes: List[str] = []

    @property
    def passed(self) -> bool:
        return all(verdict.passed for verdict in self.verdicts)
