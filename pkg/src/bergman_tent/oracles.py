"""
Analytic oracle values the test suite checks the numerics against.
"""

import math
from typing import List, NamedTuple

from scipy.special import beta


class Oracle(NamedTuple):
    name: str
    value: float
    derivation: str


ORACLES: List[Oracle] = [
    Oracle("mobius(a=0.5, z=0.25, n=1)", (0.5 - 0.25) / (1.0 - 0.125), "(a - z)/(1 - z conj(a))"),
    Oracle("bergman_distance(0, |w|=0.5)", 0.5 * math.log(3.0), "artanh(1/2) = log(3)/2"),
    Oracle("normalizing_constant(n=1, alpha=1)", 2.0, "Gamma(n+alpha+1) / (n! Gamma(alpha+1))"),
    Oracle("sphere_moment(J=(1,0), n=2)", 0.5, "(n-1)! J! / (n-1+|J|)!"),
    Oracle("sphere_moment(J=(1,1), n=2)", 1.0 / 6.0, "(n-1)! J! / (n-1+|J|)!"),
    Oracle("tau_disc_volume(gamma=1, n=1)", math.sinh(1.0) ** 2, "sinh^2 gamma = t^2/(1-t^2), t = tanh gamma"),
    Oracle("tau_ball_volume(gamma=1, n=2)", math.sinh(1.0) ** 4, "sinh^(2n) gamma"),
    Oracle("v_disc_volume(gamma=1, n=1, alpha=0)", math.tanh(1.0) ** 2, "normalized area of |z| < tanh gamma"),
    Oracle("beta_integral(3, 2)", float(beta(3.0, 2.0)), "integral of r^2 (1-r)^2 dr/(1-r) = B(3, 2) = 1/12"),
    Oracle("bergman_norm(z_1, p=2, alpha=0, n=1)", 1.0 / math.sqrt(2.0), "(integral of |z|^2 dA/pi)^(1/2)"),
    Oracle("integral(|z_1|^2 dv, n=2)", 1.0 / 3.0, "n! J! / (n+|J|)!"),
    Oracle("G2_radial_z1_coeff", 1.0 / math.sqrt(12.0), "integral of (1-r) r^2 dr = 1/12"),
    Oracle("g_radial_norm(z_1, p=q=2, alpha=0, n=1)", 1.0 / math.sqrt(24.0), "(1/sqrt 12) ||z_1||_{2,0}"),
    Oracle("atom(a=0.5, b=3, p=2, alpha=0)(0)", 0.75**2, "(1-|a|^2)^((pb-n-1-alpha)/p)"),
    Oracle("divergence_slope(z=(0.5,0))", 0.75 * 0.75, "(1-|z|^2)(1-|z_1|^2)"),
]


def render_table() -> str:
    width = max(len(oracle.name) for oracle in ORACLES)
    lines = [f"{'oracle':<{width}}  {'value':<22}  derivation"]
    lines += [f"{oracle.name:<{width}}  {oracle.value:<22.17g}  {oracle.derivation}" for oracle in ORACLES]
    return "\n".join(lines)
