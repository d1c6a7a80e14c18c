"""Argument checks and the exceptions raised by maxconv"""
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation"""


class PoleError(DomainError):
    """A functional was evaluated where F(x) or 1-F(x) vanishes"""


class MissingDensityError(DomainError):
    """A density-dependent functional was requested for a distribution without a density"""


class SolverError(RuntimeError):
    """A bracketing or bisection procedure failed to converge"""


def _describe(values: np.ndarray) -> str:
    """Render the first offending entries for an error message"""
    flat = np.ravel(values)
    shown = ", ".join(repr(float(v)) for v in flat[:3])
    return shown + (", ..." if flat.size > 3 else "")


def check_unit(u: ArrayLike, name: str = "u") -> np.ndarray:
    """Make sure every value lies in the closed unit interval

    Args:
        u: Value(s) to check
        name: Name of the argument, used in the error message
    Returns:
        (ndarray) The values as a float array
    Raises:
        DomainError: If any value is outside [0, 1] or NaN
    """
    arr = np.asarray(u, dtype=float)
    bad = ~((arr >= 0) & (arr <= 1))
    if np.any(bad):
        raise DomainError(f"{name} must lie in [0, 1], received {_describe(arr[bad])}")
    return arr


def check_probability(p: ArrayLike, name: str = "p") -> np.ndarray:
    """Alias of :func:`check_unit` for probability levels"""
    return check_unit(p, name)


def check_open_unit(u: ArrayLike, name: str = "u") -> np.ndarray:
    """Make sure every value lies in the open unit interval

    Raises:
        DomainError: If any value is outside (0, 1)
    """
    arr = np.asarray(u, dtype=float)
    bad = ~((arr > 0) & (arr < 1))
    if np.any(bad):
        raise DomainError(f"{name} must lie in (0, 1), received {_describe(arr[bad])}")
    return arr


def check_power(n: float) -> float:
    """Make sure a convolution power is a real number no smaller than 1

    Raises:
        DomainError: If n < 1 or not finite
    """
    n = float(n)
    if not np.isfinite(n) or n < 1:
        raise DomainError(f"power n must be a finite number >= 1, received {n!r}")
    return n


def check_positive(value: float, name: str) -> float:
    """Make sure a scalar parameter is strictly positive and finite"""
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, received {value!r}")
    return value


def as_output(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    """Return a Python float when the caller passed a scalar, otherwise the array"""
    if np.ndim(like) == 0:
        return float(values)
    return values
