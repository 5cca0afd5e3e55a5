"""
Band and trend statistics behind every "comparable" verdict.
"""

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import linregress

from bergman_tent.experiments.model import Verdict


class BandStats(NamedTuple):
    minimum: float
    maximum: float
    spread: float
    """maximum / minimum"""
    count: int


class TrendStats(NamedTuple):
    slope: float
    stderr: float
    count: int


def band(values: Sequence[float]) -> BandStats:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return BandStats(math.nan, math.nan, math.nan, 0)
    lo = float(values.min())
    hi = float(values.max())
    spread = hi / lo if lo > 0.0 else math.inf
    return BandStats(lo, hi, spread, int(values.size))


def boundary_coordinate(radius) -> np.ndarray:
    """-log(1 - |a|), the abscissa of every boundary-trend regression."""
    return -np.log1p(-np.asarray(radius, dtype=float))


def trend(x: Sequence[float], y: Sequence[float]) -> TrendStats:
    """Least-squares slope of y against x; zero when fewer than two distinct abscissae."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.unique(x).size < 2:
        return TrendStats(0.0, 0.0, int(x.size))
    fit = linregress(x, y)
    stderr = float(fit.stderr) if x.size > 2 else 0.0
    return TrendStats(float(fit.slope), stderr, int(x.size))


def band_trend_verdict(
    name: str,
    cell: str,
    ratios: Sequence[float],
    boundary: Sequence[float | None],
    spread_limit: float,
    slope_limit: float,
) -> Verdict:
    """
    Bounded band plus flat boundary trend.

    ratios are the comparison values of every converged function; boundary
    holds each function's |a| (None for functions without a boundary
    parameter, which only enter the band).
    """
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size < 2:
        return Verdict(
            name=name,
            cell=cell,
            passed=False,
            statistics={"count": float(ratios.size)},
            detail="fewer than two converged values",
        )
    stats = band(ratios)
    with_boundary = [(b, r) for b, r in zip(boundary, ratios) if b is not None]
    fit = trend(
        boundary_coordinate([b for b, _ in with_boundary]),
        np.log([r for _, r in with_boundary]),
    )
    passed = bool(stats.spread <= spread_limit and abs(fit.slope) <= slope_limit)
    return Verdict(
        name=name,
        cell=cell,
        passed=passed,
        statistics={
            "min": stats.minimum,
            "max": stats.maximum,
            "spread": stats.spread,
            "slope": fit.slope,
            "slope_stderr": fit.stderr,
            "count": float(stats.count),
        },
        detail=f"policy: spread <= {spread_limit:g}, |slope| <= {slope_limit:g}",
    )


def closed_form_verdict(name: str, cell: str, value: float, expected: float, rel_tol: float) -> Verdict:
    error = abs(value - expected) / max(abs(expected), 1e-300)
    return Verdict(
        name=name,
        cell=cell,
        passed=bool(error <= rel_tol),
        statistics={"value": value, "expected": expected, "rel_error": error},
        detail=f"policy: relative error <= {rel_tol:g}",
    )
