"""
Experiment runners: parameter sweeps over the golden family, band/trend
verdicts and the auxiliary-estimate suite.

Every grid cell is an independent work item. Cells run on worker threads
and the report is reassembled in grid order.
"""

import asyncio
import logging
import math
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple, Type

import numpy as np
from scipy.special import hyp2f1

from bergman_tent.experiments.estimates import suite_items
from bergman_tent.experiments.family import FamilyMember, golden_family, norm_rule
from bergman_tent.experiments.model import (
    AtomicBoundConfig,
    BesovConfig,
    Cell,
    CellResult,
    CounterexampleConfig,
    EstimateSuiteConfig,
    ExperimentConfig,
    ExperimentReport,
    FamilyGridConfig,
    GFunctionConfig,
    Record,
    TentEquivalenceConfig,
    Verdict,
    WeakTypeConfig,
)
from bergman_tent.experiments.report import write_report
from bergman_tent.experiments.stats import band_trend_verdict, boundary_coordinate, closed_form_verdict, trend
from bergman_tent.functionals import (
    GVariant,
    Resolution,
    area_integral,
    besov_area,
    besov_maximal,
    bergman_norm,
    g_function,
    generalized_norm,
    hl_maximal,
    lp_norm,
    maximal_fn,
    weighted_integral,
)
from bergman_tent.functions import (
    build_lattice,
    evaluate,
    make_atom,
    minus_value_at_origin,
    monomial,
    synthesize_atomic,
)
from bergman_tent.geometry import SpaceParams, derivative_order
from bergman_tent.quadrature import QuadRule, SingularKind, ball_rule, recenter_rule
from bergman_tent.utils import QuadratureFailure

__all__ = [
    "EXPERIMENTS",
    "atomic_bound_check",
    "besov_equivalence",
    "counterexample_check",
    "estimate_suite",
    "gfunction_equivalence",
    "run_experiment",
    "run_experiment_async",
    "tent_equivalence",
    "weak_type_check",
    "write_report",
]

logger = logging.getLogger(__name__)

WorkItem = Tuple[str, Callable[[], CellResult]]

Measure = Callable[[QuadRule, Resolution], Dict[str, float]]
"""Computes named norms of one function from a norm rule and a functional resolution"""


###################################
# Convergence gating
###################################


def _agrees(coarse: float, fine: float, tol: float) -> bool:
    if coarse == fine:
        return True
    return abs(fine - coarse) <= tol * max(abs(coarse), abs(fine))


def _gated(
    config: ExperimentConfig,
    member: FamilyMember,
    n: int,
    rule_alpha: float,
    measure: Measure,
) -> Tuple[Dict[str, float], Dict[str, bool]]:
    """
    Values at the configured resolution plus a convergence flag per value.

    A value is converged when recomputing it with every resolution doubled
    moves it by at most convergence_tol, relatively.
    """
    rule = norm_rule(member, n, rule_alpha, config.norm_radial, config.norm_sphere, config.seed)
    values = measure(rule, config.resolution)
    if not config.check_convergence:
        return values, {key: True for key in values}
    fine_rule = norm_rule(member, n, rule_alpha, 2 * config.norm_radial, 2 * config.norm_sphere, config.seed)
    fine = measure(fine_rule, config.resolution.doubled())
    converged = {key: _agrees(values[key], fine[key], config.convergence_tol) for key in values}
    for key, ok in converged.items():
        if not ok:
            logger.warning(
                f"{member.id}: {key} moved from {values[key]:.6g} to {fine[key]:.6g} under doubling, flagged"
            )
    return values, converged


class _Ratio(NamedTuple):
    name: str
    numerator: str
    denominator: str


def _ratio_rows(
    experiment: str,
    cell: Cell,
    members: Sequence[FamilyMember],
    values: Sequence[Dict[str, float]],
    converged: Sequence[Dict[str, bool]],
    ratios: Sequence[_Ratio],
    regime: str,
    config: ExperimentConfig,
) -> CellResult:
    """Norm rows, ratio rows and one band/trend verdict per ratio."""
    records: List[Record] = []
    for member, member_values, member_converged in zip(members, values, converged):
        for metric, value in member_values.items():
            records.append(
                Record(
                    experiment=experiment,
                    cell=cell.id,
                    function=member.id,
                    metric=metric,
                    value=value,
                    converged=member_converged[metric],
                    regime=regime,
                )
            )
            logger.debug(f"{cell.id} {member.id} {metric} = {value:.6g}")

    verdicts = []
    for ratio in ratios:
        band_values, boundary = [], []
        for member, member_values, member_converged in zip(members, values, converged):
            denominator = member_values[ratio.denominator]
            if denominator == 0.0:
                continue
            value = member_values[ratio.numerator] / denominator
            ok = member_converged[ratio.numerator] and member_converged[ratio.denominator]
            records.append(
                Record(
                    experiment=experiment,
                    cell=cell.id,
                    function=member.id,
                    metric=ratio.name,
                    value=value,
                    converged=ok,
                    regime=regime,
                )
            )
            if ok:
                band_values.append(value)
                boundary.append(member.boundary)
        verdicts.append(
            band_trend_verdict(
                f"band:{ratio.name}", cell.id, band_values, boundary, config.spread_limit, config.slope_limit
            )
        )
    return CellResult(records, verdicts, [])


def _regime(params: SpaceParams) -> str:
    return "q1" if params.q == 1.0 else ""


def _weighted_norm(values: np.ndarray, p: float, alpha: float, rule: QuadRule) -> float:
    """L^p(v_alpha) norm of node values for any real alpha, c_alpha = 1 when alpha <= -1."""
    return float(abs(weighted_integral(rule, np.abs(values) ** p, alpha).value)) ** (1.0 / p)


def _gamma_independence(experiment: str, cells: Sequence[Cell], results: Sequence[CellResult]) -> List[Verdict]:
    """Cells differing only in gamma must reach the same band verdicts."""
    groups: Dict[Tuple[str, str], List[bool]] = {}
    for cell, result in zip(cells, results):
        key_cell = cell.id.replace(f" gamma={cell.params.gamma:g}", "")
        for verdict in result.verdicts:
            if verdict.name.startswith("band:"):
                groups.setdefault((key_cell, verdict.name), []).append(verdict.passed)
    out = []
    for (key_cell, name), outcomes in groups.items():
        if len(outcomes) < 2:
            continue
        out.append(
            Verdict(
                name=f"gamma_independent:{name.removeprefix('band:')}",
                cell=key_cell,
                passed=len(set(outcomes)) == 1,
                statistics={"radii": float(len(outcomes)), "passing": float(sum(outcomes))},
                detail=f"{experiment}: verdicts agree across gamma",
            )
        )
    return out


###################################
# Area and maximal norms
###################################

TENT_RATIOS = (
    _Ratio("area_over_bergman", "area_norm", "bergman_norm"),
    _Ratio("maximal_over_bergman", "maximal_norm", "bergman_norm"),
    _Ratio("maximal_over_area", "maximal_norm", "area_norm"),
)


def _tent_sandwich(cell: Cell, config: TentEquivalenceConfig, members: Sequence[FamilyMember]) -> CellResult:
    """|f| <= C A_gamma, A_gamma <= C M_gamma, M_gamma <= C A_2gamma, with C flat toward the boundary."""
    params = cell.params
    n, q, gamma, alpha = params.n, params.q, params.gamma, params.alpha
    res = config.resolution
    points = np.zeros((len(config.sandwich_radii), n), dtype=complex)
    points[:, 0] = config.sandwich_radii
    chains = {"value_over_area": [], "area_over_maximal": [], "maximal_over_area_2gamma": []}
    records = []
    for member in members:
        f = member.function
        value = np.abs(evaluate(f, points))
        area = area_integral(f, points, q, gamma, res)
        maximal = maximal_fn(f, points, q, gamma, alpha, res)
        area_wide = area_integral(f, points, q, 2.0 * gamma, res)
        for name, ratio in (
            ("value_over_area", value / area),
            ("area_over_maximal", area / maximal),
            ("maximal_over_area_2gamma", maximal / area_wide),
        ):
            chains[name].append(ratio)
            for radius, entry in zip(config.sandwich_radii, ratio):
                records.append(
                    Record(
                        experiment="tent_equivalence",
                        cell=cell.id,
                        function=member.id,
                        metric=f"{name}@|z|={radius:g}",
                        value=entry,
                        regime=_regime(params),
                    )
                )
    verdicts = []
    for name, rows in chains.items():
        worst = np.max(np.array(rows), axis=0)
        fit = trend(boundary_coordinate(config.sandwich_radii), np.log(worst))
        verdicts.append(
            Verdict(
                name=f"sandwich:{name}",
                cell=cell.id,
                passed=bool(np.all(np.isfinite(worst)) and abs(fit.slope) <= config.slope_limit),
                statistics={"max_constant": float(worst.max()), "slope": fit.slope, "slope_stderr": fit.stderr},
                detail=f"policy: largest constant per |z| has |slope| <= {config.slope_limit:g}",
            )
        )
    return CellResult(records, verdicts, [])


def _tent_cell(cell: Cell, config: TentEquivalenceConfig) -> CellResult:
    params = cell.params
    n, p, q, alpha, gamma = params.n, params.p, params.q, params.alpha, params.gamma
    members = golden_family(params, config.atom_radii, config.max_degree, config.extra_functions)

    def measure_for(member: FamilyMember) -> Measure:
        f = member.function

        def measure(rule: QuadRule, res: Resolution) -> Dict[str, float]:
            return {
                "bergman_norm": bergman_norm(f, p, alpha, rule),
                "area_norm": lp_norm(area_integral(f, rule.nodes, q, gamma, res), p, alpha, rule),
                "maximal_norm": lp_norm(maximal_fn(f, rule.nodes, q, gamma, alpha, res), p, alpha, rule),
            }

        return measure

    gated = [_gated(config, member, n, alpha, measure_for(member)) for member in members]
    values = [g[0] for g in gated]
    converged = [g[1] for g in gated]
    result = _ratio_rows(
        "tent_equivalence", cell, members, values, converged, TENT_RATIOS, _regime(params), config
    )

    constant = values[0]
    expected_area = math.sinh(gamma) ** (2.0 * n / q)
    result.verdicts.append(
        closed_form_verdict("constant:area_norm", cell.id, constant["area_norm"], expected_area, 1e-6)
    )
    result.verdicts.append(closed_form_verdict("constant:maximal_norm", cell.id, constant["maximal_norm"], 1.0, 1e-12))
    result.verdicts.append(closed_form_verdict("constant:bergman_norm", cell.id, constant["bergman_norm"], 1.0, 1e-12))

    sandwich = _tent_sandwich(cell, config, members)
    return CellResult(result.records + sandwich.records, result.verdicts + sandwich.verdicts, [])


###################################
# g-functions
###################################

G_RATIOS = (
    _Ratio("g_radial_over_reference", "g_radial_norm", "reference_norm"),
    _Ratio("g_gradient_over_reference", "g_gradient_norm", "reference_norm"),
    _Ratio("g_invariant_over_reference", "g_invariant_norm", "reference_norm"),
)


def _g_cell(cell: Cell, config: GFunctionConfig) -> CellResult:
    params = cell.params
    n, p, q, alpha = params.n, params.p, params.q, params.alpha
    members = golden_family(params, config.atom_radii, config.max_degree, config.extra_functions)
    ordering_ok = True
    worst_ordering = 0.0

    def measure_for(member: FamilyMember) -> Measure:
        f = member.function
        centered = minus_value_at_origin(f)

        def measure(rule: QuadRule, res: Resolution) -> Dict[str, float]:
            nonlocal ordering_ok, worst_ordering
            radial = g_function(f, rule.nodes, q, GVariant.RADIAL, res)
            grad = g_function(f, rule.nodes, q, GVariant.GRADIENT, res)
            invariant = g_function(f, rule.nodes, q, GVariant.INVARIANT, res)
            ordering_ok &= bool(np.all(radial <= grad * (1.0 + 1e-12) + 1e-15))
            worst_ordering = max(worst_ordering, float(np.max(radial - grad)))
            return {
                "reference_norm": bergman_norm(centered, p, alpha, rule),
                "g_radial_norm": lp_norm(radial, p, alpha, rule),
                "g_gradient_norm": lp_norm(grad, p, alpha, rule),
                "g_invariant_norm": lp_norm(invariant, p, alpha, rule),
            }

        return measure

    gated = [_gated(config, member, n, alpha, measure_for(member)) for member in members]
    values = [g[0] for g in gated]
    converged = [g[1] for g in gated]
    result = _ratio_rows("gfunction_equivalence", cell, members, values, converged, G_RATIOS, "", config)

    constant = values[0]
    result.verdicts.append(
        Verdict(
            name="constant_vanishes",
            cell=cell.id,
            passed=all(value == 0.0 for value in constant.values()),
            statistics={key: value for key, value in constant.items()},
            detail="all four quantities are exactly zero for f = 1",
        )
    )
    result.verdicts.append(
        Verdict(
            name="pointwise:g_radial_le_g_gradient",
            cell=cell.id,
            passed=ordering_ok,
            statistics={"max_excess": worst_ordering},
            detail="G_R <= G_grad at every norm-rule node",
        )
    )
    if n == 1 and p == 2.0 and q == 2.0 and alpha == 0.0:
        z1 = next(i for i, member in enumerate(members) if member.id == "z^(1,)")
        result.verdicts.append(
            closed_form_verdict(
                "closed_form:g_radial_z1", cell.id, values[z1]["g_radial_norm"], 1.0 / math.sqrt(24.0), 1e-6
            )
        )
    return result


###################################
# Derivative (Besov-type) norms
###################################

BESOV_RATIOS = (
    _Ratio("area_over_reference", "area_norm", "reference_norm"),
    _Ratio("maximal_over_reference", "maximal_norm", "reference_norm"),
)


def _besov_rule_alpha(params: SpaceParams) -> float:
    """Weight of the norm rules; alpha itself when admissible, else alpha + pN."""
    if params.alpha > -1.0:
        return params.alpha
    return params.alpha + params.p * derivative_order(params.p, params.alpha)


def _besov_cell(cell: Cell, config: BesovConfig) -> CellResult:
    params = cell.params
    n, p, q, alpha, gamma, k = params.n, params.p, params.q, params.alpha, params.gamma, params.k
    if not p * k + alpha > -1.0:
        verdict = Verdict(
            name="precondition",
            cell=cell.id,
            passed=False,
            statistics={"pk_plus_alpha": p * k + alpha},
            detail="p*k + alpha > -1 is required",
        )
        return CellResult([], [verdict], [f"{cell.id}: skipped, p*k + alpha = {p * k + alpha:g} <= -1"])

    members = golden_family(params, config.atom_radii, config.max_degree, config.extra_functions)
    rule_alpha = _besov_rule_alpha(params)

    def measure_for(member: FamilyMember) -> Measure:
        f = member.function
        centered = minus_value_at_origin(f)

        def measure(rule: QuadRule, res: Resolution) -> Dict[str, float]:
            area = besov_area(f, rule.nodes, q, gamma, k, res)
            maximal = besov_maximal(f, rule.nodes, q, gamma, alpha, k, res)
            return {
                "reference_norm": generalized_norm(centered, p, alpha, rule),
                "area_norm": _weighted_norm(area, p, alpha, rule),
                "maximal_norm": _weighted_norm(maximal, p, alpha, rule),
            }

        return measure

    gated = [_gated(config, member, n, rule_alpha, measure_for(member)) for member in members]
    values = [g[0] for g in gated]
    converged = [g[1] for g in gated]
    return _ratio_rows(
        "besov_equivalence", cell, members, values, converged, BESOV_RATIOS, _regime(params), config
    )


###################################
# Weak type (1, 1)
###################################


def _level_set_sup(maximal: np.ndarray, weights: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    sup over lambda of lambda * v_alpha(M > lambda) on the rule nodes.

    With nodal values sorted descending the supremum is max_i m_i W(>= m_i),
    approached as lambda rises to m_i.
    """
    order = np.argsort(-maximal, kind="stable")
    sorted_values = maximal[order]
    mass = np.cumsum(weights[order])
    # ties share the mass of the whole tie block
    last_of_value = np.searchsorted(-sorted_values, -sorted_values, side="right") - 1
    products = sorted_values * mass[last_of_value]
    return float(products.max()), sorted_values, mass


def _weak_type_cell(cell: Cell, config: WeakTypeConfig) -> CellResult:
    params = cell.params
    n, alpha, gamma = params.n, params.alpha, params.gamma
    res = config.resolution
    b = params.atom_exponent()
    records, verdicts = [], []

    def sup_and_norm(
        radius: float | None, fine: bool, scale: float = 1.0
    ) -> Tuple[float, float, np.ndarray, np.ndarray]:
        radial = 2 * config.norm_radial if fine else config.norm_radial
        sphere = 2 * config.norm_sphere if fine else config.norm_sphere
        resolution = res.doubled() if fine else res
        rule = ball_rule(n, alpha, radial, sphere, config.seed)
        if radius is None:
            field = lambda x: np.full(x.shape[:-1], scale)  # noqa: E731
            l1_norm = 1.0
        else:
            center = np.zeros(n, dtype=complex)
            center[0] = radius
            atom = make_atom(center, b, 1.0, alpha)
            field = lambda x: scale * np.abs(evaluate(atom, x))  # noqa: E731
            l1_norm = (1.0 - radius**2) ** (b - n - 1.0 - alpha) * hyp2f1(b / 2.0, b / 2.0, n + 1.0 + alpha, radius**2)
            if radius >= 0.5:
                rule = recenter_rule(rule, center)
        maximal = hl_maximal(field, rule.nodes, gamma, alpha, resolution)
        sup, sorted_values, mass = _level_set_sup(maximal, rule.weights)
        return sup, float(l1_norm), sorted_values, mass

    sup, _, _, _ = sup_and_norm(None, False)
    records.append(
        Record(experiment="weak_type_check", cell=cell.id, function="one", metric="sup_lambda_level", value=sup)
    )
    verdicts.append(closed_form_verdict("constant_exact", cell.id, sup, 1.0, 1e-12))

    constants, boundary = [], []
    for radius in config.bump_radii:
        function_id = f"|atom|a|={radius:g}|"
        sup, l1_norm, sorted_values, mass = sup_and_norm(radius, False)
        ratio = sup / l1_norm
        converged = True
        if config.check_convergence:
            fine_sup, _, _, _ = sup_and_norm(radius, True)
            converged = _agrees(ratio, fine_sup / l1_norm, config.convergence_tol)
            if not converged:
                logger.warning(f"{cell.id} {function_id}: weak-type constant unconverged")
        for metric, value in (("sup_lambda_level", sup), ("l1_norm", l1_norm), ("weak_type_constant", ratio)):
            records.append(
                Record(
                    experiment="weak_type_check",
                    cell=cell.id,
                    function=function_id,
                    metric=metric,
                    value=value,
                    converged=converged,
                )
            )
        lambdas = np.geomspace(sorted_values[-1], sorted_values[0], config.lambda_count, endpoint=False)
        for lam in lambdas:
            above = np.searchsorted(-sorted_values, -lam, side="left")
            measure = float(mass[above - 1]) if above > 0 else 0.0
            records.append(
                Record(
                    experiment="weak_type_check",
                    cell=cell.id,
                    function=function_id,
                    metric=f"lambda_level@lambda={lam:.6g}",
                    value=lam * measure,
                    converged=converged,
                )
            )
        if radius == config.bump_radii[0]:
            doubled, _, _, _ = sup_and_norm(radius, False, scale=2.0)
            verdicts.append(closed_form_verdict("homogeneity", cell.id, doubled, 2.0 * sup, 1e-12))
        if converged:
            constants.append(ratio)
            boundary.append(radius)

    verdicts.append(
        band_trend_verdict(
            "band:weak_type_constant", cell.id, constants, boundary, config.spread_limit, config.slope_limit
        )
    )
    return CellResult(records, verdicts, [])


###################################
# Divergence counterexample
###################################


def _counterexample_cell(cell: Cell, config: CounterexampleConfig) -> CellResult:
    index = int(cell.extra["index"])
    z = np.array(config.points[index], dtype=complex)
    f = monomial(1, 0)
    res = Resolution(segments=config.segments)
    records, verdicts = [], []

    logs, partials = [], []
    for m in config.eps_exponents:
        value = float(g_function(f, z, 2.0, GVariant.INVARIANT, res, weight=SingularKind.ONE_MINUS_R, cutoff=2.0**-m))
        partial = value**2
        logs.append(m * math.log(2.0))
        partials.append(partial)
        records.append(
            Record(
                experiment="counterexample_check",
                cell=cell.id,
                function="z_1",
                metric=f"partial_integral@eps=2^-{m}",
                value=partial,
            )
        )
    slope = trend(logs, partials).slope
    z_sq = float(np.sum(np.abs(z) ** 2))
    expected = (1.0 - z_sq) * (1.0 - abs(z[0]) ** 2)
    records.append(
        Record(experiment="counterexample_check", cell=cell.id, function="z_1", metric="divergence_slope", value=slope)
    )
    verdicts.append(closed_form_verdict("divergence_slope", cell.id, slope, expected, config.slope_tol))

    coarse = float(g_function(f, z, 2.0, GVariant.INVARIANT, res)) ** 2
    doubled = res.model_copy(update={"segments": 2 * config.segments})
    fine = float(g_function(f, z, 2.0, GVariant.INVARIANT, doubled)) ** 2
    change = abs(fine - coarse) / max(abs(fine), 1e-300)
    records.append(
        Record(experiment="counterexample_check", cell=cell.id, function="z_1", metric="weighted_integral", value=fine)
    )
    verdicts.append(
        Verdict(
            name="weighted_convergent",
            cell=cell.id,
            passed=bool(change <= config.weighted_tol),
            statistics={"value": fine, "relative_change": change},
            detail=f"dr/(1 - r|z|) integral stable under segment doubling to {config.weighted_tol:g}",
        )
    )
    return CellResult(records, verdicts, [])


###################################
# Atomic synthesis bound
###################################


def _atomic_cell(cell: Cell, config: AtomicBoundConfig) -> CellResult:
    params = cell.params
    n, p, alpha = params.n, params.p, params.alpha
    delta = cell.extra["delta"]
    b = params.atom_exponent()
    lattice = build_lattice(n, delta, config.r_max, config.seed)
    records, notes = [], []

    def integral(coeffs: np.ndarray, sub, radial: int, sphere: int) -> float:
        f = synthesize_atomic(coeffs, sub, b, p, alpha)
        rule = ball_rule(n, alpha, radial, sphere, config.seed)
        return float(abs(weighted_integral(rule, lambda x: np.abs(evaluate(f, x)) ** p, alpha).value))

    def add(function: str, metric: str, value: float, converged: bool = True):
        records.append(
            Record(
                experiment="atomic_bound_check",
                cell=cell.id,
                function=function,
                metric=metric,
                value=value,
                converged=converged,
            )
        )

    constants, sizes = [], []
    for size in config.sizes:
        if size > lattice.size:
            notes.append(f"{cell.id}: lattice has {lattice.size} centers, size {size} truncated to it")
        sub = lattice.truncate(min(size, lattice.size))
        for trial in range(config.trials):
            rng = np.random.default_rng([config.seed, size, trial])
            coeffs = rng.standard_normal(sub.size) + 1j * rng.standard_normal(sub.size)
            coeff_sum = float(np.sum(np.abs(coeffs) ** p))
            value = integral(coeffs, sub, config.norm_radial, config.norm_sphere)
            converged = True
            if config.check_convergence:
                fine = integral(coeffs, sub, 2 * config.norm_radial, 2 * config.norm_sphere)
                converged = _agrees(value, fine, config.convergence_tol)
            ratio = value / coeff_sum
            function_id = f"size={sub.size} trial={trial}"
            add(function_id, "integral", value, converged)
            add(function_id, "coefficient_sum", coeff_sum)
            add(function_id, "bound_constant", ratio, converged)
            if converged:
                constants.append(ratio)
                sizes.append(sub.size)
    logger.debug(f"{cell.id}: lattice of {lattice.size} centers, packing bound {lattice.packing_bound:.1f}")

    verdicts = []
    if len(constants) < 2:
        verdicts.append(
            Verdict(name="band:bound_constant", cell=cell.id, passed=False, detail="fewer than two converged values")
        )
    else:
        spread = max(constants) / min(constants)
        fit = trend(np.log(sizes), np.log(constants))
        verdicts.append(
            Verdict(
                name="band:bound_constant",
                cell=cell.id,
                passed=bool(spread <= config.spread_limit and fit.slope <= config.slope_limit),
                statistics={
                    "min": min(constants),
                    "max": max(constants),
                    "spread": spread,
                    "slope": fit.slope,
                    "slope_stderr": fit.stderr,
                },
                detail=f"policy: spread <= {config.spread_limit:g}, slope against log size <= {config.slope_limit:g}",
            )
        )

    # integral of |atom|^p dv_alpha in closed form, one value per lattice center
    a_sq = np.sum(np.abs(lattice.centers) ** 2, axis=-1)
    single = (1.0 - a_sq) ** (p * b - n - 1.0 - alpha) * hyp2f1(p * b / 2.0, p * b / 2.0, n + 1.0 + alpha, a_sq)
    add("single_atoms", "max_integral", float(single.max()))
    add("single_atoms", "min_integral", float(single.min()))
    verdicts.append(
        Verdict(
            name="single_atoms_bounded",
            cell=cell.id,
            passed=bool(single.max() / single.min() <= config.spread_limit),
            statistics={"min": float(single.min()), "max": float(single.max())},
            detail="closed-form integral of |atom|^p over every lattice center",
        )
    )

    zero = integral(np.zeros(lattice.size), lattice, config.norm_radial, config.norm_sphere)
    add("zero", "integral", zero)
    verdicts.append(
        Verdict(name="zero_coefficients", cell=cell.id, passed=zero == 0.0, statistics={"integral": zero})
    )

    if p == 2.0 and lattice.size >= 2:
        far = lattice.truncate(lattice.size)
        coeffs = np.zeros(lattice.size, dtype=complex)
        coeffs[0] = coeffs[-1] = 1.0
        pair = integral(coeffs, far, config.norm_radial, config.norm_sphere)
        singles = single[0] + single[-1]
        add("far_pair", "integral_over_sum", pair / singles)
    return CellResult(records, verdicts, notes)


###################################
# Orchestration
###################################


class Experiment(NamedTuple):
    config_type: Type[ExperimentConfig]
    items: Callable[[ExperimentConfig], List[WorkItem]]
    finalize: Callable[[ExperimentConfig, List[CellResult]], List[Verdict]] | None = None


def _cell_items(run: Callable[[Cell, ExperimentConfig], CellResult]) -> Callable[[ExperimentConfig], List[WorkItem]]:
    def items(config: ExperimentConfig) -> List[WorkItem]:
        return [(cell.id, lambda cell=cell: run(cell, config)) for cell in config.cells()]

    return items


def _gamma_finalizer(experiment: str):
    def finalize(config: FamilyGridConfig, results: List[CellResult]) -> List[Verdict]:
        return _gamma_independence(experiment, config.cells(), results)

    return finalize


def _atomic_across_p(config: AtomicBoundConfig, results: List[CellResult]) -> List[Verdict]:
    """The largest bound constant of each p must stay in one band for fixed n, alpha and delta."""
    groups: Dict[str, List[Tuple[float, float]]] = {}
    for cell, result in zip(config.cells(), results):
        key_cell = cell.id.replace(f" p={cell.params.p:g}", "")
        for verdict in result.verdicts:
            if verdict.name == "band:bound_constant" and "max" in verdict.statistics:
                groups.setdefault(key_cell, []).append((cell.params.p, verdict.statistics["max"]))
    out = []
    for key_cell, entries in groups.items():
        if len(entries) < 2:
            continue
        ps = [p for p, _ in entries]
        worst = [c for _, c in entries]
        spread = max(worst) / min(worst)
        fit = trend(np.log(ps), np.log(worst))
        out.append(
            Verdict(
                name="stable_across_p:bound_constant",
                cell=key_cell,
                passed=bool(spread <= config.spread_limit),
                statistics={"min": min(worst), "max": max(worst), "spread": spread, "slope_log_p": fit.slope},
                detail=f"policy: largest constant per p within spread {config.spread_limit:g}",
            )
        )
    return out


EXPERIMENTS: Dict[str, Experiment] = {
    "tent_equivalence": Experiment(
        TentEquivalenceConfig, _cell_items(_tent_cell), _gamma_finalizer("tent_equivalence")
    ),
    "gfunction_equivalence": Experiment(GFunctionConfig, _cell_items(_g_cell)),
    "besov_equivalence": Experiment(BesovConfig, _cell_items(_besov_cell), _gamma_finalizer("besov_equivalence")),
    "weak_type_check": Experiment(WeakTypeConfig, _cell_items(_weak_type_cell)),
    "estimate_suite": Experiment(EstimateSuiteConfig, suite_items),
    "counterexample_check": Experiment(CounterexampleConfig, _cell_items(_counterexample_cell)),
    "atomic_bound_check": Experiment(AtomicBoundConfig, _cell_items(_atomic_cell), _atomic_across_p),
}


async def _run_items(items: List[WorkItem], workers: int) -> List[CellResult]:
    """Run every work item on a worker thread; results keep the item order."""
    semaphore = asyncio.Semaphore(max(workers, 1))
    results: List[CellResult | None] = [None] * len(items)

    async def run_one(index: int, cell_id: str, work: Callable[[], CellResult]) -> None:
        async with semaphore:
            try:
                results[index] = await asyncio.to_thread(work)
            except Exception as e:
                # any cell error is reported with the cell it came from
                raise QuadratureFailure(cell_id, e) from e
            verdicts = results[index].verdicts
            logger.info(f"Cell {cell_id}: {sum(v.passed for v in verdicts)}/{len(verdicts)} verdicts passed")

    try:
        async with asyncio.TaskGroup() as tg:
            for index, (cell_id, work) in enumerate(items):
                tg.create_task(run_one(index, cell_id, work))
    except* QuadratureFailure as group:
        raise group.exceptions[0]
    return results


async def run_experiment_async(name: str, config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    experiment = EXPERIMENTS[name]
    items = experiment.items(config)
    logger.info(f"Running {name}: {len(items)} work items on {workers} workers, seed {config.seed}")
    results = await _run_items(items, workers)

    report = ExperimentReport(experiment=name, seed=config.seed, config=config.model_dump(mode="json"))
    for result in results:
        report.records.extend(result.records)
        report.verdicts.extend(result.verdicts)
        report.notes.extend(result.notes)
    if experiment.finalize is not None:
        report.verdicts.extend(experiment.finalize(config, results))
    logger.info(f"Finished {name}: {'PASS' if report.passed else 'FAIL'}")
    return report


def run_experiment(name: str, config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    return asyncio.run(run_experiment_async(name, config, workers))


def tent_equivalence(config: TentEquivalenceConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("tent_equivalence", config, workers)


def gfunction_equivalence(config: GFunctionConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("gfunction_equivalence", config, workers)


def besov_equivalence(config: BesovConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("besov_equivalence", config, workers)


def weak_type_check(config: WeakTypeConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("weak_type_check", config, workers)


def estimate_suite(config: EstimateSuiteConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("estimate_suite", config, workers)


def counterexample_check(config: CounterexampleConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("counterexample_check", config, workers)


def atomic_bound_check(config: AtomicBoundConfig, workers: int = 1) -> ExperimentReport:
    return run_experiment("atomic_bound_check", config, workers)
