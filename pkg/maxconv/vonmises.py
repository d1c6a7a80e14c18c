"""Von Mises functionals and membership checks

A distribution F belongs to the class studied here when
``k(x) = x F'(x) / (F(x) (1 - F(x))) - alpha`` is dominated by a non-increasing
auxiliary function g that vanishes at infinity. The companion functional ``h`` replaces
``1 - F`` by ``-log F`` and is what the classical calculus sees after the map X.
"""
import json
import logging
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.special import exprel

from maxconv import config
from maxconv.distributions import Cdf, ConvolutionKind, EvDistribution
from maxconv.models.reports import Violation, VonMisesReport
from maxconv.utils.futures import chunked, parallel_map
from maxconv.utils.validation import (ArrayLike, DomainError, MissingDensityError, PoleError, as_output,
                                      check_open_unit, check_positive)

logger = logging.getLogger(__name__)

# Terms kept in the series of -log(1 - s) - s
_SERIES_TERMS = 60
_SERIES_CUTOFF = 0.25

# Below this z = x^-alpha, k of the Frechet law is summed as a series
_FRECHET_K_SERIES_CUTOFF = 1e-3


class AuxFn(BaseModel):
    """Auxiliary function g of the von Mises condition

    ``g`` is only evaluated, and the condition only asserted, for ``x >= valid_from``.
    """

    model_config = ConfigDict(frozen=True)

    func: Callable = Field(..., exclude=True, description="Vectorized function of x")
    valid_from: float = Field(..., gt=0, description="Threshold x0 from which g is used")
    label: str = Field('g', description="Human-readable description")

    def __call__(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            out = np.broadcast_to(np.asarray(self.func(arr), dtype=float), arr.shape)
        return as_output(np.array(out), x)

    def check_shape(self, points: int = 200, span: float = 1e6) -> List[str]:
        """Look for evidence that g is not a valid auxiliary function

        Checks that g is finite, non-negative and non-increasing on a geometric grid over
        ``[valid_from, span * valid_from]`` and that it decays by at least a factor of 10
        across that range.

        Returns:
            ([str]) Descriptions of the problems found, empty if none
        """
        grid = np.geomspace(self.valid_from, span * self.valid_from, points)
        values = np.asarray(self(grid), dtype=float)
        issues = []
        if not np.all(np.isfinite(values)):
            issues.append(f'{self.label} is not finite at x={grid[~np.isfinite(values)][0]:g}')
            return issues
        if np.any(values < 0):
            issues.append(f'{self.label} is negative at x={grid[values < 0][0]:g}')
        rises = np.flatnonzero(np.diff(values) > 1e-15 * np.abs(values[:-1]))
        if rises.size > 0:
            issues.append(f'{self.label} increases near x={grid[rises[0] + 1]:g}')
        if not values[-1] < values[0] / 10:
            issues.append(f'{self.label} does not decay: g({grid[-1]:g})={values[-1]:g}, g({grid[0]:g})={values[0]:g}')
        return issues


def frechet_aux(alpha: float) -> AuxFn:
    """The auxiliary function alpha / (x^alpha - 1), usable from 2^(1/alpha) where it drops below alpha"""
    alpha = check_positive(alpha, 'alpha')
    return AuxFn(func=lambda x: alpha / np.expm1(alpha * np.log(x)),
                 valid_from=2 ** (1 / alpha), label=f'{alpha:g}/(x^{alpha:g}-1)')


def constant_aux(c: float, valid_from: float = 1.0) -> AuxFn:
    """A constant auxiliary function, used for degenerate checks"""
    c = float(c)
    return AuxFn(func=lambda x: np.full_like(x, c), valid_from=valid_from, label=f'{c:g}')


class TabulatedAux(AuxFn):
    """Auxiliary function read from tabulated (x, g) pairs

    Interpolated linearly in (log x, log g) and extrapolated beyond the last point
    with the slope of the last segment, which must be negative so that g vanishes at infinity.
    Below the first point the first value is used.
    """

    points: Tuple[Tuple[float, float], ...] = Field(..., description="(x, g(x)) pairs")

    @field_validator('points')
    @classmethod
    def _check_points(cls, points):
        if len(points) < 2:
            raise ValueError('at least two (x, g) points are required')
        xs = np.array([p[0] for p in points], dtype=float)
        gs = np.array([p[1] for p in points], dtype=float)
        if np.any(xs <= 0) or np.any(gs <= 0):
            raise ValueError('x and g values must be positive')
        if np.any(np.diff(xs) <= 0):
            raise ValueError('x values must be strictly increasing')
        if not gs[-1] < gs[-2]:
            raise ValueError('the last segment must be decreasing so the extrapolation vanishes at infinity')
        return points

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]], valid_from: float, label: Optional[str] = None) -> 'TabulatedAux':
        pts = tuple((float(x), float(g)) for x, g in points)
        log_x = np.log([p[0] for p in pts])
        log_g = np.log([p[1] for p in pts])
        last_slope = (log_g[-1] - log_g[-2]) / (log_x[-1] - log_x[-2])

        def func(x):
            lx = np.log(np.where(x > 0, x, 1.0))
            inside = np.interp(lx, log_x, log_g)
            beyond = log_g[-1] + last_slope * (lx - log_x[-1])
            return np.exp(np.where(lx > log_x[-1], beyond, inside))

        return cls(func=func, valid_from=valid_from, points=pts, label=label or f'tabulated({len(pts)} points)')

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> 'TabulatedAux':
        """Load a file of the form ``{"valid_from": x0, "points": [[x, g], ...]}``"""
        with open(path) as fp:
            document = json.load(fp)
        try:
            return cls.from_points(document['points'], document['valid_from'], label=document.get('label', str(path)))
        except KeyError as exc:
            raise DomainError(f'{path} is missing the field {exc.args[0]!r}') from None


def _require_density(F: Cdf):
    if not F.has_density:
        raise MissingDensityError(f'{F.label} has no density, von Mises functionals are undefined')


def _ratio_functional(F: Cdf, alpha: float, x: ArrayLike, denominator: str) -> Tuple[np.ndarray, np.ndarray]:
    """x F'(x) / (F(x) D(x)) - alpha with D = 1 - F or -log F

    Returns:
        Values (NaN at poles) and the pole mask
    """
    _require_density(F)
    arr = np.asarray(x, dtype=float)
    u = np.asarray(F.cdf(arr), dtype=float)
    if denominator == 'survival':
        d = np.asarray(F.sf(arr), dtype=float)
    else:
        d = -np.asarray(F.logcdf(arr), dtype=float)
    poles = (u < config.POLE_GUARD) | (d < config.POLE_GUARD)
    f = np.asarray(F.pdf(arr), dtype=float)
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        values = np.where(poles, np.nan, arr * f / (u * d) - alpha)
    return values, poles


def _raise_poles(F: Cdf, x: ArrayLike, poles: np.ndarray):
    if np.any(poles):
        bad = np.ravel(np.asarray(x, dtype=float) * np.ones_like(poles, dtype=float))[np.ravel(poles)]
        raise PoleError(f'F(x) or 1-F(x) vanishes for {F.label} at x={bad[0]!r}')


def k_func(F: Cdf, alpha: float, x: ArrayLike) -> ArrayLike:
    """Evaluate k_{alpha,F}(x) = x F'(x) / (F(x) (1 - F(x))) - alpha

    Args:
        F: Distribution with a density
        alpha: Tail index
        x: Point(s) of evaluation
    Returns:
        Value(s) of the functional
    Raises:
        PoleError: If F(x) or 1 - F(x) is below the pole guard
        MissingDensityError: If F has no density
    """
    values, poles = _ratio_functional(F, alpha, x, 'survival')
    _raise_poles(F, x, poles)
    return as_output(values, x)


def h_func(F: Cdf, alpha: float, x: ArrayLike) -> ArrayLike:
    """Evaluate h_{alpha,F}(x) = x F'(x) / (F(x) (-log F(x))) - alpha

    Raises:
        PoleError: If F(x) or -log F(x) is below the pole guard
        MissingDensityError: If F has no density
    """
    values, poles = _ratio_functional(F, alpha, x, 'log')
    _raise_poles(F, x, poles)
    return as_output(values, x)


def frechet_k(alpha: float, x: ArrayLike) -> ArrayLike:
    """Closed form of k for the classical Frechet law: alpha (z / (1 - exp(-z)) - 1), z = x^-alpha

    Small z uses the series z/2 + z^2/12 - z^4/720, where the closed form cancels.
    """
    arr = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore', over='ignore'):
        z = np.exp(-alpha * np.log(arr))
    small = z < _FRECHET_K_SERIES_CUTOFF
    t = np.where(small, z, 0.)
    series = t / 2 + t ** 2 / 12 - t ** 4 / 720
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        closed = 1. / exprel(-np.where(small, 1., z)) - 1
    return as_output(alpha * np.where(small, series, closed), x)


def _k_values(F: Cdf, alpha: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """k_{alpha,F} on a grid, in closed form for the classical Frechet law

    The closed form has no pole where 1 - F(x) underflows, so only F(x) ~ 0 is flagged there.
    """
    if isinstance(F, EvDistribution) and F.family.kind == ConvolutionKind.classical and F.alpha > 0:
        u = np.asarray(F.cdf(x), dtype=float)
        poles = u < config.POLE_GUARD
        values = np.asarray(frechet_k(F.alpha, x), dtype=float) + (F.alpha - alpha)
        return np.where(poles, np.nan, values), poles
    return _ratio_functional(F, alpha, x, 'survival')


def r_survival(s: ArrayLike) -> ArrayLike:
    """r evaluated at u = 1 - s, i.e. -log(1 - s) - s, without cancellation for small s"""
    arr = np.asarray(s, dtype=float)
    small = arr < _SERIES_CUTOFF
    t = np.where(small, arr, 0.)

    # Horner evaluation of sum_{k>=2} t^k / k
    acc = np.zeros_like(t)
    for k in range(_SERIES_TERMS, 1, -1):
        acc = t * (1. / k + acc)
    series = t * acc

    with np.errstate(divide='ignore'):
        direct = -np.log1p(-np.where(small, 0., arr)) - arr
    return as_output(np.where(small, series, direct), s)


def ell_survival(s: ArrayLike) -> ArrayLike:
    """ell evaluated at u = 1 - s"""
    arr = np.asarray(s, dtype=float)
    return as_output(np.asarray(r_survival(arr)) / -np.log1p(-arr), s)


def r_func(u: ArrayLike) -> ArrayLike:
    """r(u) = -log u - (1 - u), non-negative and non-increasing on (0, 1)

    Raises:
        DomainError: If u is outside (0, 1)
    """
    arr = check_open_unit(u)
    return as_output(np.asarray(r_survival(1. - arr)), u)


def ell_func(u: ArrayLike) -> ArrayLike:
    """ell(u) = r(u) / (-log u), decreasing from 1 at 0 to 0 at 1

    Raises:
        DomainError: If u is outside (0, 1)
    """
    arr = check_open_unit(u)
    return as_output(np.asarray(r_survival(1. - arr)) / -np.log(arr), u)


def u_bound(F: Cdf, alpha: float, g: AuxFn, x: ArrayLike) -> ArrayLike:
    """The bound g(x) + alpha ell(F(x)) on |h_{alpha,F}(x)|, valid where |k_{alpha,F}| <= g

    Raises:
        DomainError: If x is below ``g.valid_from``
        PoleError: If F(x) is 0 or 1
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < g.valid_from):
        raise DomainError(f'u_bound requires x >= {g.valid_from:g}')
    u = np.asarray(F.cdf(arr), dtype=float)
    s = np.asarray(F.sf(arr), dtype=float)
    _raise_poles(F, x, (u < config.POLE_GUARD) | (s < config.POLE_GUARD))
    return as_output(np.asarray(g(arr)) + alpha * np.asarray(ell_survival(s)), x)


def verify_von_mises(F: Cdf, alpha: float, g: AuxFn, grid: ArrayLike, max_workers: Optional[int] = None) -> VonMisesReport:
    """Check |k_{alpha,F}(x)| <= g(x) at every grid point

    Points where k cannot be evaluated (poles) are listed as diagnostics rather than raised.

    Args:
        F: Distribution with a density
        alpha: Tail index
        g: Auxiliary function
        grid: Points at which to check, all >= ``g.valid_from``
        max_workers: Number of threads to use (default: from ``MAXCONV_THREADS``)
    Returns:
        (VonMisesReport) The verdict
    """
    _require_density(F)
    grid = np.sort(np.asarray(grid, dtype=float).ravel())
    if grid.size == 0:
        raise DomainError('the verification grid is empty')
    if grid[0] < g.valid_from:
        raise DomainError(f'grid starts at {grid[0]:g}, below valid_from={g.valid_from:g}')

    # Evaluate in chunks so large grids spread over the worker pool
    workers = max_workers or config.get_thread_count()
    pieces = parallel_map(lambda part: _k_values(F, alpha, part), chunked(grid, workers), workers)
    k_values = np.concatenate([p[0] for p in pieces])
    poles = np.concatenate([p[1] for p in pieces])
    g_values = np.asarray(g(grid), dtype=float)

    abs_k = np.abs(k_values)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(abs_k == 0, 0., abs_k / g_values)
    violated = ~poles & (abs_k > g_values)
    violations = [Violation(x=x, k=k, g=gv, ratio=(r if np.isfinite(r) else None))
                  for x, k, gv, r in zip(grid[violated], k_values[violated], g_values[violated], ratio[violated])]
    diagnostics = [f'pole at x={x!r}: F(x) or 1-F(x) below {config.POLE_GUARD:g}' for x in grid[poles]]
    finite_ratio = ratio[~poles]
    if finite_ratio.size == 0:
        ratio_max = 0.
    elif np.all(np.isfinite(finite_ratio)):
        ratio_max = float(finite_ratio.max())
    else:
        ratio_max = None

    if violations:
        logger.info(f'{len(violations)} of {grid.size} points violate |k| <= g for {F.label}')
    return VonMisesReport(
        label=F.label, alpha=alpha, valid_from=g.valid_from, grid=grid.tolist(),
        k=[None if p else float(v) for v, p in zip(k_values, poles)], g=g_values.tolist(),
        ratio_max=ratio_max, violations=violations, diagnostics=diagnostics, aux_issues=g.check_shape()
    )
