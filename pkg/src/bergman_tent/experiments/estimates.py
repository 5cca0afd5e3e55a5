"""
The auxiliary-estimate suite: geometric comparabilities, kernel integrals,
ball volumes, the mean-value bound, the S-operator dichotomy and the
invariant-gradient kernel bound.

Each check is an independent work item returning a CellResult.
"""

import logging
import math
from typing import Callable, List, Tuple

import numpy as np
from scipy.special import betainc

from bergman_tent.experiments.model import Cell, CellResult, EstimateSuiteConfig, Record, Verdict
from bergman_tent.experiments.stats import (
    band,
    band_trend_verdict,
    boundary_coordinate,
    closed_form_verdict,
    trend,
)
from bergman_tent.functionals import (
    GVariant,
    ball_average,
    ball_volume,
    g_function,
    j_integral,
    j_integral_closed_form,
    operator_s_radial,
)
from bergman_tent.functions import (
    Combination,
    KernelPower,
    Term,
    evaluate,
    invariant_gradient_norm,
    make_atom,
    monomial,
)
from bergman_tent.geometry import mobius_transform, normalizing_constant
from bergman_tent.quadrature import ball_rule, radial_plain_rule
from bergman_tent.utils import one_minus_squared_norm

logger = logging.getLogger(__name__)

EXPERIMENT = "estimate_suite"

WorkItem = Tuple[str, Callable[[], CellResult]]

MIN_SEGMENTS = 16
SHELL_OCTAVES = 4
"""Family steps between the two S-operator ratios compared"""
OUTER_DEPTH_FACTOR = 2
"""S f_j is measured on |z| < 1 - 2^-(factor * j)"""


def _record(cell: str, function: str, metric: str, value: float) -> Record:
    return Record(experiment=EXPERIMENT, cell=cell, function=function, metric=metric, value=float(value))


def _random_directions(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    gauss = rng.standard_normal((count, 2 * n))
    directions = gauss[:, :n] + 1j * gauss[:, n:]
    return directions / np.linalg.norm(directions, axis=-1, keepdims=True)


def _random_in_ball(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    radii = radius * rng.uniform(size=count) ** (1.0 / (2 * n))
    return radii[:, None] * _random_directions(rng, count, n)


def _axis_points(n: int, radii: List[float]) -> np.ndarray:
    points = np.zeros((len(radii), n), dtype=complex)
    points[:, 0] = radii
    return points


###################################
# Kernel integrals J_{c, alpha}
###################################


def kernel_integral_growth(cell: Cell, config: EstimateSuiteConfig) -> CellResult:
    params = cell.params
    rule = radial_plain_rule(max(config.resolution.segments, MIN_SEGMENTS))
    gaps = np.asarray(sorted(config.kernel_gaps, reverse=True))
    z_mag = 1.0 - gaps
    records, verdicts = [], []
    for c in config.c:
        values = j_integral(c, params.alpha, z_mag, params.n, rule)
        exact = j_integral_closed_form(c, params.alpha, z_mag, params.n)
        normalized = values * (gaps * (2.0 - gaps)) ** c
        for gap, value in zip(gaps, normalized):
            records.append(_record(cell.id, f"J c={c:g}", f"normalized@gap={gap:g}", value))

        # last decade: the smallest gap against the gap closest to ten times it
        last = len(gaps) - 1
        previous = int(np.argmin(np.abs(np.log10(gaps) - np.log10(10.0 * gaps[last]))))
        change = abs(normalized[last] - normalized[previous]) / normalized[last]
        verdicts.append(
            Verdict(
                name=f"kernel_integral_stabilizes:c={c:g}",
                cell=cell.id,
                passed=bool(change < config.stabilization_tol),
                statistics={"relative_change": float(change), "normalized": float(normalized[last])},
                detail=f"policy: relative change over the last decade < {config.stabilization_tol:g}",
            )
        )
        agreement = float(np.max(np.abs(values - exact) / exact))
        verdicts.append(
            Verdict(
                name=f"kernel_integral_closed_form:c={c:g}",
                cell=cell.id,
                passed=agreement < 1e-4,
                statistics={"max_rel_error": agreement},
                detail="radial reduction against the hypergeometric closed form",
            )
        )
    return CellResult(records, verdicts, [])


###################################
# Ball volumes and mean values
###################################


def ball_volume_comparability(cell: Cell, config: EstimateSuiteConfig) -> CellResult:
    params = cell.params
    n, alpha, gamma = params.n, params.alpha, params.gamma
    points = _axis_points(n, config.radii)
    volumes = ball_volume(points, gamma, alpha, config.resolution)
    ratios = volumes / one_minus_squared_norm(points) ** (n + 1.0 + alpha)
    records = [
        _record(cell.id, f"|z|={r:g}", "v_alpha(D)/(1-|z|^2)^(n+1+alpha)", ratio)
        for r, ratio in zip(config.radii, ratios)
    ]
    verdicts = [
        band_trend_verdict(
            "ball_volume_comparable",
            cell.id,
            ratios,
            list(config.radii),
            config.spread_limit,
            config.slope_limit,
        )
    ]
    exact_at_origin = betainc(n, alpha + 1.0, math.tanh(gamma) ** 2)
    at_origin = float(ball_volume(np.zeros(n), gamma, alpha, config.resolution))
    verdicts.append(closed_form_verdict("ball_volume_at_origin", cell.id, at_origin, exact_at_origin, 1e-6))
    return CellResult(records, verdicts, [])


def mean_value_bound(cell: Cell, config: EstimateSuiteConfig) -> CellResult:
    """|f(z)|^p <= C * v_alpha average of |f|^p over D(z, gamma), with C flat toward the boundary."""
    params = cell.params
    n, alpha, gamma = params.n, params.alpha, params.gamma
    p = 2.0
    b = params.model_copy(update={"p": p}).atom_exponent()
    functions = [(f"atom|a|={r:g}", make_atom((r,) + (0.0,) * (n - 1), b, p, alpha)) for r in config.radii]
    functions += [("z_1", monomial(*((1,) + (0,) * (n - 1)))), ("z_1^2", monomial(*((2,) + (0,) * (n - 1))))]

    points = _axis_points(n, config.radii)
    records = []
    worst = np.zeros(points.shape[0])
    slopes = []
    for name, f in functions:
        pointwise = np.abs(evaluate(f, points)) ** p
        averages = np.real(ball_average(lambda x: np.abs(evaluate(f, x)) ** p, points, gamma, alpha, config.resolution))
        constants = pointwise / averages
        worst = np.maximum(worst, constants)
        for r, value in zip(config.radii, constants):
            records.append(_record(cell.id, name, f"mean_value_constant@|z|={r:g}", value))
        positive = constants > 0.0
        if np.count_nonzero(positive) >= 2:
            slopes.append(
                trend(boundary_coordinate(np.asarray(config.radii)[positive]), np.log(constants[positive])).slope
            )
    fit = trend(boundary_coordinate(config.radii), np.log(worst))
    passed = bool(np.all(np.isfinite(worst)) and abs(fit.slope) <= config.slope_limit)
    verdict = Verdict(
        name="mean_value_bound",
        cell=cell.id,
        passed=passed,
        statistics={
            "max_constant": float(worst.max()),
            "slope": fit.slope,
            "slope_stderr": fit.stderr,
            "max_member_slope": float(max((abs(s) for s in slopes), default=0.0)),
        },
        detail=f"policy: largest constant per |z| has |slope| <= {config.slope_limit:g}",
    )
    return CellResult(records, [verdict], [])


###################################
# Pointwise comparabilities
###################################


def _comparability_verdict(name: str, cell: str, spreads: List[float], radii, limit: float, envelope_ok: bool):
    fit = trend(boundary_coordinate(radii), np.log(spreads))
    return Verdict(
        name=name,
        cell=cell,
        passed=bool(fit.slope <= limit),
        statistics={
            "max_spread": float(max(spreads)),
            "slope": fit.slope,
            "slope_stderr": fit.stderr,
            "within_envelope": float(envelope_ok),
        },
        detail=f"policy: slope of log-spread against -log(1-|a|) <= {limit:g}",
    )


def point_comparability(cell: Cell, config: EstimateSuiteConfig) -> CellResult:
    """1 - |a|^2, 1 - |z|^2 and |1 - <a, z>| are comparable when beta(a, z) < gamma."""
    params = cell.params
    n, gamma = params.n, params.gamma
    rng = np.random.default_rng(config.seed)
    lower, upper = math.exp(-2.0 * gamma) / 4.0, 4.0 * math.exp(2.0 * gamma)
    records, spreads = [], []
    envelope_ok = True
    for r in config.radii:
        a = r * _random_directions(rng, config.samples, n)
        u = _random_in_ball(rng, config.samples, n, math.tanh(gamma) * (1.0 - 1e-9))
        z = mobius_transform(a, u)
        q1 = one_minus_squared_norm(a)
        au = np.sum(u * np.conj(a), axis=-1)
        q2 = q1 * one_minus_squared_norm(u) / np.abs(1.0 - au) ** 2
        q3 = np.abs(1.0 - np.sum(a * np.conj(z), axis=-1))
        ratios = np.concatenate([q1 / q2, q1 / q3, q2 / q3])
        envelope_ok &= bool(np.all((ratios >= lower) & (ratios <= upper)))
        spread = band(ratios).spread
        spreads.append(spread)
        records.append(_record(cell.id, f"|a|={r:g}", "comparability_spread", spread))
    verdict = _comparability_verdict(
        "point_comparability", cell.id, spreads, config.radii, config.comparability_slope_limit, envelope_ok
    )
    return CellResult(records, [verdict], [])


def kernel_shift_comparability(cell: Cell, config: EstimateSuiteConfig) -> CellResult:
    """|1 - <z, u>| and |1 - <z, v>| are comparable when beta(u, v) < gamma, z in the closed ball."""
    params = cell.params
    n, gamma = params.n, params.gamma
    rng = np.random.default_rng(config.seed + 1)
    records, spreads = [], []
    for r in config.radii:
        u = r * _random_directions(rng, config.samples, n)
        v = mobius_transform(u, _random_in_ball(rng, config.samples, n, math.tanh(gamma) * (1.0 - 1e-9)))
        # half of the z on the sphere itself
        z_radii = np.where(np.arange(config.samples) % 2 == 0, 1.0, rng.uniform(size=config.samples))
        z = z_radii[:, None] * _random_directions(rng, config.samples, n)
        ratios = np.abs(1.0 - np.sum(z * np.conj(u), axis=-1)) / np.abs(1.0 - np.sum(z * np.conj(v), axis=-1))
        spread = band(ratios).spread
        spreads.append(spread)
        records.append(_record(cell.id, f"|u|={r:g}", "kernel_shift_spread", spread))
    verdict = _comparability_verdict(
        "kernel_shift_comparability", cell.id, spreads, config.radii, config.comparability_slope_limit, True
    )
    return CellResult(records, [verdict], [])


def one_minus_t_lambda(config: EstimateSuiteConfig) -> CellResult:
    """|1 - t lambda| / ((1 - t) + |1 - lambda|) over t in [0, 1], |lambda| <= 1."""
    m = config.grid_points
    t = np.linspace(0.0, 1.0, m)
    radius = np.linspace(0.0, 1.0, m)
    angle = np.linspace(0.0, 2.0 * np.pi, m)
    lam = (radius[:, None] * np.exp(1j * angle[None, :])).reshape(-1)
    numerator = np.abs(1.0 - t[:, None] * lam[None, :])
    denominator = (1.0 - t[:, None]) + np.abs(1.0 - lam[None, :])
    keep = denominator > 1e-15
    ratios = numerator[keep] / denominator[keep]
    lo, hi = float(ratios.min()), float(ratios.max())
    records = [
        _record("all", "grid", "ratio_min", lo),
        _record("all", "grid", "ratio_max", hi),
    ]
    verdict = Verdict(
        name="one_minus_t_lambda",
        cell="all",
        passed=bool(lo >= 1.0 / 3.0 - 1e-12 and hi <= 3.0),
        statistics={"min": lo, "max": hi, "excluded": float(np.count_nonzero(~keep))},
        detail="envelope [1/3, 3]; the t = 1, lambda = 1 corner is excluded",
    )
    return CellResult(records, [verdict], [])


###################################
# Operator S dichotomy
###################################


def _shell_ratio(n: int, j: int, p: float, t: float, a: float, b: float, segments: int) -> float:
    inner = radial_plain_rule(segments)
    lo, hi = 2.0 ** -(j + 1), 2.0**-j

    def profile(gaps: np.ndarray) -> np.ndarray:
        return ((gaps > lo) & (gaps <= hi)).astype(float)

    c_t = normalizing_constant(n, t)
    rho, rho_gaps = inner.nodes, inner.meta["gaps"]
    f_norm = c_t * np.sum(
        inner.weights * 2 * n * rho ** (2 * n - 1) * (rho_gaps * (2.0 - rho_gaps)) ** t * profile(rho_gaps)
    )
    outer = radial_plain_rule(segments, cutoff=2.0 ** -(OUTER_DEPTH_FACTOR * j))
    r, r_gaps = outer.nodes, outer.meta["gaps"]
    s_values = operator_s_radial(profile, r, a, b, n, inner)
    s_norm = c_t * np.sum(
        outer.weights * 2 * n * r ** (2 * n - 1) * (r_gaps * (2.0 - r_gaps)) ** t * np.abs(s_values) ** p
    )
    return float((s_norm / f_norm) ** (1.0 / p))


def operator_s_dichotomy(n: int, config: EstimateSuiteConfig) -> CellResult:
    """
    Empirical ||S f_j|| / ||f_j|| on the dyadic shells f_j = 1{1 - 2^-j <= |w| < 1 - 2^-(j+1)}.

    Parameters satisfying -pa < t + 1 < p(b + 1) must keep the ratio within a
    factor 2 over every four octaves; the others must grow by at least 2.
    """
    cell = f"n={n}"
    segments = max(config.resolution.segments, MIN_SEGMENTS)
    records, verdicts = [], []
    for p, t, a, b in config.operator_triples:
        label = f"(p,t,a,b)=({p:g},{t:g},{a:g},{b:g})"
        ratios = [_shell_ratio(n, j, p, t, a, b, segments) for j in range(1, config.shell_levels + 1)]
        for j, ratio in enumerate(ratios, start=1):
            records.append(_record(cell, label, f"shell_ratio@j={j}", ratio))
        growth = max(ratios[i + SHELL_OCTAVES] / ratios[i] for i in range(len(ratios) - SHELL_OCTAVES))
        bounded = -p * a < t + 1.0 < p * (b + 1.0)
        passed = growth < 2.0 if bounded else growth >= 2.0
        verdicts.append(
            Verdict(
                name=f"operator_s_{'bounded' if bounded else 'unbounded'}:{label}",
                cell=cell,
                passed=bool(passed),
                statistics={"max_growth": float(growth), "first_ratio": ratios[0], "last_ratio": ratios[-1]},
                detail="policy: growth over four octaves < 2 when bounded, >= 2 otherwise",
            )
        )
    return CellResult(records, verdicts, [])


###################################
# Invariant gradient of kernel integrals
###################################


def invariant_gradient_kernel_bound(n: int, config: EstimateSuiteConfig) -> CellResult:
    """
    f(z) = sum_i w_i g(x_i) (1 - <z, x_i>)^-beta over a dv rule satisfies
    |grad~ f(z)| <= sqrt(2) |beta| (1 - |z|^2)^(1/2) sum_i w_i |g(x_i)| / |1 - <z, x_i>|^(beta + 1/2).
    """
    cell = f"n={n}"
    rule = ball_rule(n, 0.0, 6, 16, config.seed)
    nodes = rule.nodes
    g = 1.0 + 2.0 * nodes[:, 0] + 0.5j * np.conj(nodes[:, -1])
    rng = np.random.default_rng(config.seed + 2)
    z = _random_in_ball(rng, 50, n, 0.95)
    records, verdicts = [], []
    for beta in config.kernel_betas:
        f = Combination(
            dim=n,
            terms=tuple(
                Term(
                    coefficient=1.0,
                    function=KernelPower(center=tuple(complex(x) for x in node), b=beta, scale=complex(weight * value)),
                )
                for node, weight, value in zip(nodes, rule.weights, g)
            ),
        )
        lhs = invariant_gradient_norm(f, z)
        kernel = np.abs(1.0 - z @ np.conj(nodes).T) ** (-(beta + 0.5))
        rhs = math.sqrt(2.0) * abs(beta) * np.sqrt(one_minus_squared_norm(z)) * (kernel @ (rule.weights * np.abs(g)))
        worst = float(np.max(lhs / rhs))
        records.append(_record(cell, f"beta={beta:g}", "max_lhs_over_rhs", worst))
        verdicts.append(
            Verdict(
                name=f"invariant_gradient_kernel_bound:beta={beta:g}",
                cell=cell,
                passed=bool(np.all(lhs <= rhs * (1.0 + 1e-10) + 1e-14)),
                statistics={"max_ratio": worst},
                detail="pointwise bound at 50 seeded points",
            )
        )
    return CellResult(records, verdicts, [])


def g_function_closed_form(n: int, config: EstimateSuiteConfig) -> CellResult:
    """G^(2)_R(z_1)(z) = |z_1| / sqrt(12)."""
    cell = f"n={n}"
    rng = np.random.default_rng(config.seed + 3)
    z = _random_in_ball(rng, 100, n, 0.99)
    f = monomial(*((1,) + (0,) * (n - 1)))
    values = g_function(f, z, 2.0, GVariant.RADIAL, config.resolution.model_copy(update={"segments": MIN_SEGMENTS}))
    error = float(np.max(np.abs(values - np.abs(z[:, 0]) / math.sqrt(12.0))))
    verdict = Verdict(
        name="g_function_closed_form",
        cell=cell,
        passed=error <= 1e-6,
        statistics={"max_abs_error": error},
        detail="100 seeded points, policy: error <= 1e-6",
    )
    return CellResult([_record(cell, "z_1", "g_radial_max_abs_error", error)], [verdict], [])


def suite_items(config: EstimateSuiteConfig) -> List[WorkItem]:
    """Every check of the suite as an independent work item, in report order."""
    items: List[WorkItem] = []
    for cell in config.cells():
        items.append((f"kernel:{cell.id}", lambda cell=cell: kernel_integral_growth(cell, config)))
        items.append((f"volume:{cell.id}", lambda cell=cell: ball_volume_comparability(cell, config)))
        items.append((f"mean:{cell.id}", lambda cell=cell: mean_value_bound(cell, config)))
        items.append((f"points:{cell.id}", lambda cell=cell: point_comparability(cell, config)))
        items.append((f"shift:{cell.id}", lambda cell=cell: kernel_shift_comparability(cell, config)))
    for n in sorted(set(config.n)):
        items.append((f"operator_s:n={n}", lambda n=n: operator_s_dichotomy(n, config)))
        items.append((f"kernel_gradient:n={n}", lambda n=n: invariant_gradient_kernel_bound(n, config)))
        items.append((f"g_closed_form:n={n}", lambda n=n: g_function_closed_form(n, config)))
    items.append(("one_minus_t_lambda", lambda: one_minus_t_lambda(config)))
    return items
