import numpy as np


class BergmanToolkitError(Exception):
    """Base class for all errors raised by the toolkit."""

    pass


class DimensionMismatchError(BergmanToolkitError, ValueError):
    """Points or parameters of different complex dimension were combined."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"Dimension mismatch: expected n={expected}, got n={actual}")
        self.expected = expected
        self.actual = actual


class NotInteriorError(BergmanToolkitError, ValueError):
    """A point on or outside the unit sphere was given where an interior point is required."""

    def __init__(self, norm: float):
        super().__init__(f"Point with |z| = {norm!r} is not in the open unit ball")
        self.norm = norm


class InvalidParameterError(BergmanToolkitError, ValueError):
    """A numeric parameter is outside the range an operation accepts."""

    pass


class AtomHypothesisError(InvalidParameterError):
    """The atom exponent violates b > n max{1, 1/p} + (alpha + 1)/p."""

    def __init__(self, b: float, bound: float, n: int, p: float, alpha: float):
        super().__init__(
            f"Atom exponent b={b} violates b > n*max(1, 1/p) + (alpha+1)/p "
            f"= {n}*max(1, 1/{p}) + ({alpha}+1)/{p} = {bound}"
        )
        self.b = b
        self.bound = bound


class NonFiniteIntegrandError(BergmanToolkitError, ArithmeticError):
    """A quadrature integrand produced NaN or infinity at a node."""

    def __init__(self, node, value):
        super().__init__(f"Non-finite integrand value {value!r} at node {node!r}")
        self.node = node
        self.value = value


class QuadratureFailure(BergmanToolkitError):
    """An error raised while evaluating one experiment cell, tagged with the cell id."""

    def __init__(self, cell_id: str, cause: Exception):
        super().__init__(f"Quadrature failure in cell {cell_id}: {type(cause).__name__}: {cause}")
        self.cell_id = cell_id
        self.cause = cause


class ConfigError(BergmanToolkitError):
    """The experiment configuration does not match its schema."""

    pass


def compensated_sum(terms: np.ndarray, axis: int = -1) -> np.ndarray:
    """Neumaier-compensated sum along one axis."""
    terms = np.moveaxis(np.asarray(terms, dtype=float), axis, -1)
    total = np.zeros(terms.shape[:-1])
    carry = np.zeros(terms.shape[:-1])
    for k in range(terms.shape[-1]):
        term = terms[..., k]
        t = total + term
        big = np.abs(total) >= np.abs(term)
        carry += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + carry


def squared_norm(z: np.ndarray) -> np.ndarray:
    """|z|^2 along the last axis, summed with compensation."""
    z = np.asarray(z)
    return compensated_sum(z.real**2 + z.imag**2)


def one_minus_squared_norm(z: np.ndarray) -> np.ndarray:
    """1 - |z|^2 computed as (1 - |z|)(1 + |z|) to keep precision near the sphere."""
    r = np.sqrt(squared_norm(z))
    return (1.0 - r) * (1.0 + r)
