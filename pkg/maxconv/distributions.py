"""Evaluable distribution functions

Holds the extreme-value families of the classical, free and Boolean max-convolution
calculus, a tabulated step CDF for user data, and lazily evaluated transforms of a
distribution. Every distribution exposes a survival channel (``sf``) that is accurate
when the CDF is close to 1, and all tail-sensitive code in the package consumes it.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import expit, log_expit, logit

from maxconv.utils.validation import ArrayLike, DomainError, MissingDensityError, as_output, check_probability

logger = logging.getLogger(__name__)


class ConvolutionKind(str, Enum):
    """The three max-convolution calculi"""

    classical = "classical"
    free = "free"
    boolean = "boolean"


class Cdf:
    """Base class for a distribution function

    Subclasses implement :meth:`cdf` and :meth:`sf`. The remaining methods have generic
    implementations built on those two and may be overridden with closed forms.
    All methods accept scalars or numpy arrays and return the same shape.
    """

    #: Left end of the support (0 for distributions on [0, inf))
    support_lo: float = -math.inf

    #: Whether :meth:`pdf` is available
    has_density: bool = False

    @property
    def label(self) -> str:
        """Short human-readable name"""
        return type(self).__name__

    def cdf(self, x: ArrayLike) -> ArrayLike:
        """Evaluate F(x)"""
        raise NotImplementedError()

    def sf(self, x: ArrayLike) -> ArrayLike:
        """Evaluate 1 - F(x)"""
        return as_output(1.0 - np.asarray(self.cdf(x), dtype=float), x)

    def logcdf(self, x: ArrayLike) -> ArrayLike:
        """Evaluate log F(x), through the survival channel where F(x) > 1/2"""
        u = np.asarray(self.cdf(x), dtype=float)
        s = np.asarray(self.sf(x), dtype=float)
        with np.errstate(divide='ignore', invalid='ignore'):
            out = np.where(u > 0.5, np.log1p(-s), np.log(u))
        return as_output(out, x)

    def pdf(self, x: ArrayLike) -> ArrayLike:
        """Evaluate the density F'(x)"""
        raise MissingDensityError(f'{self.label} has no density')

    def pdf_bounds(self, a: np.ndarray, b: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Enclosure of the density over each cell [a, b]

        Returns:
            Arrays (lo, hi) with lo <= F' <= hi almost everywhere on each cell, or None when
            no enclosure is known (including distributions with atoms)
        """
        return None

    def breakpoints(self) -> Tuple[float, ...]:
        """Points where the density jumps, blows up or has a corner"""
        return ()

    def quantile(self, p: ArrayLike) -> ArrayLike:
        """Generalized inverse F<-(p) = inf{x : F(x) >= p}"""
        raise NotImplementedError()

    def isf(self, s: ArrayLike) -> ArrayLike:
        """Generalized inverse evaluated at the level 1 - s"""
        s = check_probability(s, 's')
        return self.quantile(as_output(1.0 - s, s))

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.cdf(x)


# Closed forms for each named family. Every function receives x (or a level) as a float
#  array and the tail index, and must be total on the reals / on [0, 1]


class _Formulas(NamedTuple):
    cdf: Callable
    sf: Callable
    logcdf: Callable
    pdf: Callable
    quantile: Callable
    isf: Callable
    support_lo: Callable[[float], float]
    #: Points inside the support where the density turns from increasing to decreasing
    modes: Callable[[float], Tuple[float, ...]]
    #: Points where the density jumps between finite one-sided limits
    jumps: Callable[[float], Tuple[float, ...]]
    #: Points where the density is unbounded
    poles: Callable[[float], Tuple[float, ...]]


def _positive(x: np.ndarray) -> np.ndarray:
    """Replace non-positive entries by 1 so logs and powers stay finite"""
    return np.where(x > 0, x, 1.0)


def _frechet_z(x, a):
    return np.where(x > 0, np.exp(-a * np.log(_positive(x))), np.inf)


def _frechet_level(z, a):
    """Invert z = x^-a; z is -log of the level, so z == 0 (possibly -0.0) maps to +inf"""
    z = np.abs(z)
    with np.errstate(divide='ignore'):
        return np.where(z > 0, np.power(np.where(z > 0, z, 1.0), -1.0 / a), np.inf)


_FRECHET = _Formulas(
    cdf=lambda x, a: np.where(x > 0, np.exp(-_frechet_z(x, a)), 0.0),
    sf=lambda x, a: np.where(x > 0, -np.expm1(-_frechet_z(x, a)), 1.0),
    logcdf=lambda x, a: np.where(x > 0, -_frechet_z(x, a), -np.inf),
    pdf=lambda x, a: np.where(x > 0, a / _positive(x) * np.exp(-a * np.log(_positive(x)) - _frechet_z(x, a)), 0.0),
    quantile=lambda p, a: np.where(p > 0, _frechet_level(-np.log(np.where(p > 0, p, 0.5)), a), 0.0),
    isf=lambda s, a: np.where(s < 1, _frechet_level(-np.log1p(-np.where(s < 1, s, 0.5)), a), 0.0),
    support_lo=lambda a: 0.0,
    modes=lambda a: ((a / (a + 1)) ** (1 / a),),
    jumps=lambda a: (),
    poles=lambda a: (),
)


def _weibull_w(x, b):
    return np.where(x < 0, np.exp(b * np.log(_positive(-x))), 0.0)


_WEIBULL = _Formulas(
    cdf=lambda x, a: np.where(x < 0, np.exp(-_weibull_w(x, -a)), 1.0),
    sf=lambda x, a: np.where(x < 0, -np.expm1(-_weibull_w(x, -a)), 0.0),
    logcdf=lambda x, a: np.where(x < 0, -_weibull_w(x, -a), 0.0),
    pdf=lambda x, a: np.where(x < 0, -a * np.exp((-a - 1) * np.log(_positive(-x)) - _weibull_w(x, -a)), 0.0),
    quantile=lambda p, a: -np.power(-np.log(p), -1.0 / a) + 0.0,
    isf=lambda s, a: -np.power(-np.log1p(-s), -1.0 / a) + 0.0,
    support_lo=lambda a: -math.inf,
    modes=lambda a: (-((-a - 1) / -a) ** (-1 / a),) if a < -1 else (),
    jumps=lambda a: (0.0,) if a == -1 else (),
    poles=lambda a: (0.0,) if a > -1 else (),
)

_GUMBEL = _Formulas(
    cdf=lambda x, a: np.exp(-np.exp(-x)),
    sf=lambda x, a: -np.expm1(-np.exp(-x)),
    logcdf=lambda x, a: -np.exp(-x),
    pdf=lambda x, a: np.exp(-x - np.exp(-x)),
    quantile=lambda p, a: -np.log(-np.log(p)),
    isf=lambda s, a: -np.log(-np.log1p(-s)),
    support_lo=lambda a: -math.inf,
    modes=lambda a: (0.0,),
    jumps=lambda a: (),
    poles=lambda a: (),
)


def _pareto_log_x(x):
    return np.log(np.where(x >= 1, x, 1.0))


_PARETO = _Formulas(
    cdf=lambda x, a: np.where(x >= 1, -np.expm1(-a * _pareto_log_x(x)), 0.0),
    sf=lambda x, a: np.where(x >= 1, np.exp(-a * _pareto_log_x(x)), 1.0),
    logcdf=lambda x, a: np.where(x >= 1, np.log(-np.expm1(-a * _pareto_log_x(x))), -np.inf),
    pdf=lambda x, a: np.where(x >= 1, a * np.exp((-a - 1) * _pareto_log_x(x)), 0.0),
    quantile=lambda p, a: np.where(p < 1, np.power(1.0 - np.where(p < 1, p, 0.0), -1.0 / a), np.inf),
    isf=lambda s, a: np.where(s > 0, np.power(np.where(s > 0, s, 1.0), -1.0 / a), np.inf),
    support_lo=lambda a: 1.0,
    modes=lambda a: (),
    jumps=lambda a: (1.0,),
    poles=lambda a: (),
)


def _beta_v(x, b):
    return np.power(np.clip(-x, 0.0, 1.0), b)


_BETA = _Formulas(
    cdf=lambda x, a: np.where(x < -1, 0.0, np.where(x <= 0, 1.0 - _beta_v(x, -a), 1.0)),
    sf=lambda x, a: np.where(x < -1, 1.0, np.where(x <= 0, _beta_v(x, -a), 0.0)),
    logcdf=lambda x, a: np.where(x < -1, -np.inf, np.where(x <= 0, np.log1p(-_beta_v(x, -a)), 0.0)),
    pdf=lambda x, a: np.where((x >= -1) & (x < 0), -a * np.power(np.clip(-x, 1e-300, 1.0), -a - 1), 0.0),
    quantile=lambda p, a: -np.power(1.0 - p, -1.0 / a) + 0.0,
    isf=lambda s, a: -np.power(s, -1.0 / a) + 0.0,
    support_lo=lambda a: -1.0,
    modes=lambda a: (),
    jumps=lambda a: (-1.0, 0.0) if a == -1 else (-1.0,),
    poles=lambda a: (0.0,) if a > -1 else (),
)

_EXPONENTIAL = _Formulas(
    cdf=lambda x, a: np.where(x >= 0, -np.expm1(-np.maximum(x, 0.0)), 0.0),
    sf=lambda x, a: np.where(x >= 0, np.exp(-np.maximum(x, 0.0)), 1.0),
    logcdf=lambda x, a: np.where(x >= 0, np.log(-np.expm1(-np.maximum(x, 0.0))), -np.inf),
    pdf=lambda x, a: np.where(x >= 0, np.exp(-np.maximum(x, 0.0)), 0.0),
    quantile=lambda p, a: -np.log1p(-p),
    isf=lambda s, a: -np.log(s),
    support_lo=lambda a: 0.0,
    modes=lambda a: (),
    jumps=lambda a: (0.0,),
    poles=lambda a: (),
)


def _dagum_t(x, a):
    return a * np.log(_positive(x))


_DAGUM = _Formulas(
    cdf=lambda x, a: np.where(x > 0, expit(_dagum_t(x, a)), 0.0),
    sf=lambda x, a: np.where(x > 0, expit(-_dagum_t(x, a)), 1.0),
    logcdf=lambda x, a: np.where(x > 0, log_expit(_dagum_t(x, a)), -np.inf),
    pdf=lambda x, a: np.where(x > 0, a / _positive(x) * expit(_dagum_t(x, a)) * expit(-_dagum_t(x, a)), 0.0),
    quantile=lambda p, a: np.exp(logit(p) / a),
    isf=lambda s, a: np.exp(-logit(s) / a),
    support_lo=lambda a: 0.0,
    modes=lambda a: (((a - 1) / (a + 1)) ** (1 / a),) if a > 1 else (),
    jumps=lambda a: (0.0,) if a == 1 else (),
    poles=lambda a: (0.0,) if a < 1 else (),
)

#: Family name -> (kind, sign of alpha, formulas)
_FAMILIES: Dict[str, tuple] = {
    'frechet': (ConvolutionKind.classical, 1, _FRECHET),
    'weibull': (ConvolutionKind.classical, -1, _WEIBULL),
    'gumbel': (ConvolutionKind.classical, 0, _GUMBEL),
    'pareto': (ConvolutionKind.free, 1, _PARETO),
    'beta': (ConvolutionKind.free, -1, _BETA),
    'exponential': (ConvolutionKind.free, 0, _EXPONENTIAL),
    'dagum': (ConvolutionKind.boolean, 1, _DAGUM),
}

FAMILY_NAMES = tuple(_FAMILIES)


class EvFamily(BaseModel):
    """A parametric extreme-value family: the limit law of one max-convolution calculus

    The sign of ``alpha`` selects the case: alpha > 0 (Frechet / Pareto / Dagum),
    alpha < 0 (Weibull / Beta) and alpha = 0 (Gumbel / Exponential).
    The Boolean calculus only has the alpha > 0 case.
    """

    model_config = ConfigDict(frozen=True)

    kind: ConvolutionKind
    alpha: float

    @model_validator(mode='after')
    def _check_alpha(self) -> 'EvFamily':
        if not math.isfinite(self.alpha):
            raise ValueError('alpha must be finite')
        if self.kind == ConvolutionKind.boolean and self.alpha <= 0:
            raise ValueError('the Boolean extreme-value family requires alpha > 0')
        return self

    @property
    def name(self) -> str:
        """Conventional name of the law (e.g., "frechet")"""
        sign = int(np.sign(self.alpha))
        for name, (kind, family_sign, _) in _FAMILIES.items():
            if kind == self.kind and family_sign == sign:
                return name
        raise AssertionError('unreachable: every (kind, sign) pair is registered')

    @classmethod
    def from_name(cls, name: str, alpha: float = 1.0) -> 'EvFamily':
        """Create a family from its conventional name

        Args:
            name: One of ``frechet, weibull, gumbel, pareto, beta, exponential, dagum``
            alpha: Magnitude of the tail index. Ignored for gumbel and exponential;
                the sign is implied by the name
        Returns:
            (EvFamily) The family
        """
        try:
            kind, sign, _ = _FAMILIES[name.lower()]
        except KeyError:
            raise DomainError(f'Unknown family {name!r}. Choose from: {", ".join(FAMILY_NAMES)}') from None
        if sign != 0 and not alpha > 0:
            raise DomainError(f'alpha must be positive for the {name} family, received {alpha!r}')
        return cls(kind=kind, alpha=sign * abs(alpha))


@dataclass(frozen=True)
class EvDistribution(Cdf):
    """Closed-form distribution function of an :class:`EvFamily`"""

    family: EvFamily
    has_density: bool = field(default=True, init=False)

    @property
    def _formulas(self) -> _Formulas:
        return _FAMILIES[self.family.name][2]

    @property
    def alpha(self) -> float:
        return self.family.alpha

    @property
    def support_lo(self) -> float:
        return self._formulas.support_lo(self.alpha)

    @property
    def label(self) -> str:
        return f'{self.family.name}(alpha={self.alpha:g})'

    def _apply(self, name: str, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore', over='ignore', invalid='ignore', under='ignore'):
            out = getattr(self._formulas, name)(arr, self.alpha)
        return as_output(out, x)

    def cdf(self, x):
        return self._apply('cdf', x)

    def sf(self, x):
        return self._apply('sf', x)

    def logcdf(self, x):
        return self._apply('logcdf', x)

    def pdf(self, x):
        return self._apply('pdf', x)

    def pdf_bounds(self, a, b):
        # Between modes, jumps and poles the density is monotone. The cell ends are read
        #  just inside the cell so that a jump at an end contributes its inner limit
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        fa = np.asarray(self.pdf(np.nextafter(a, b)), dtype=float)
        fb = np.asarray(self.pdf(np.nextafter(b, a)), dtype=float)
        lo, hi = np.minimum(fa, fb), np.maximum(fa, fb)
        for mode in self._formulas.modes(self.alpha):
            inside = (a < mode) & (mode < b)
            hi = np.where(inside, np.maximum(hi, float(self.pdf(mode))), hi)
        for jump in self._formulas.jumps(self.alpha):
            sides = [float(self.pdf(np.nextafter(jump, side))) for side in (-math.inf, math.inf)]
            inside = (a < jump) & (jump < b)
            lo = np.where(inside, np.minimum(lo, min(sides)), lo)
            hi = np.where(inside, np.maximum(hi, max(sides)), hi)
        for pole in self._formulas.poles(self.alpha):
            touches = (a <= pole) & (pole <= b)
            lo = np.where(touches, 0.0, lo)
            hi = np.where(touches, np.inf, hi)
        return lo, hi

    def breakpoints(self):
        return tuple(self._formulas.jumps(self.alpha)) + tuple(self._formulas.poles(self.alpha))

    def quantile(self, p):
        check_probability(p)
        return self._apply('quantile', p)

    def isf(self, s):
        check_probability(s, 's')
        return self._apply('isf', s)


def frechet(alpha: float) -> EvDistribution:
    """Classical Frechet law exp(-x^-alpha) on (0, inf)"""
    return EvDistribution(EvFamily(kind=ConvolutionKind.classical, alpha=alpha))


def pareto(alpha: float) -> EvDistribution:
    """Free Pareto law (1 - x^-alpha) on [1, inf)"""
    return EvDistribution(EvFamily(kind=ConvolutionKind.free, alpha=alpha))


def dagum(alpha: float) -> EvDistribution:
    """Boolean extreme-value (Dagum) law 1 / (1 + x^-alpha) on (0, inf)"""
    return EvDistribution(EvFamily(kind=ConvolutionKind.boolean, alpha=alpha))


def limit_law(kind: Union[str, ConvolutionKind], alpha: float) -> EvDistribution:
    """The extreme-value law of a calculus with tail index alpha"""
    return EvDistribution(EvFamily(kind=ConvolutionKind(kind), alpha=alpha))


def ev_cdf(family: EvFamily, x: ArrayLike) -> ArrayLike:
    """Evaluate the distribution function of an extreme-value family

    Args:
        family: Family and tail index
        x: Point(s) at which to evaluate
    Returns:
        Value(s) in [0, 1]
    """
    return EvDistribution(family).cdf(x)


def ev_survival(family: EvFamily, x: ArrayLike) -> ArrayLike:
    """Evaluate 1 - F(x) without cancellation"""
    return EvDistribution(family).sf(x)


def ev_density(family: EvFamily, x: ArrayLike) -> ArrayLike:
    """Evaluate the closed-form density of an extreme-value family"""
    return EvDistribution(family).pdf(x)


def ev_quantile(family: EvFamily, p: ArrayLike) -> ArrayLike:
    """Closed-form generalized inverse of an extreme-value family

    Levels 0 and 1 map onto the ends of the support (``inf`` when unbounded)

    Raises:
        DomainError: If p is outside [0, 1]
    """
    return EvDistribution(family).quantile(p)


@dataclass(frozen=True, eq=False)
class GridCdf(Cdf):
    """Right-continuous step distribution function tabulated at knots

    ``F(x) = probs[i]`` for ``knots[i] <= x < knots[i+1]`` and 0 left of the first knot.
    """

    knots: np.ndarray
    probs: np.ndarray
    name: str = 'grid'

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if knots.ndim != 1 or knots.shape != probs.shape or knots.size == 0:
            raise DomainError('knots and probs must be non-empty one-dimensional arrays of equal length')
        if not np.all(np.isfinite(knots)):
            raise DomainError('knots must be finite')
        if np.any(np.diff(knots) <= 0):
            raise DomainError('knots must be strictly increasing')
        check_probability(probs, 'probs')
        if np.any(np.diff(probs) < 0):
            raise DomainError('probs must be non-decreasing')
        if probs[-1] != 1:
            raise DomainError(f'probs must end at 1, last value is {probs[-1]!r}')

        # Store read-only copies so the instance is immutable
        knots.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, 'knots', knots)
        object.__setattr__(self, 'probs', probs)

    @property
    def support_lo(self) -> float:
        return float(self.knots[0])

    @property
    def label(self) -> str:
        return f'{self.name}({self.knots.size} knots)'

    def _index(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.knots, x, side='right') - 1

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        idx = self._index(arr)
        out = np.where(idx < 0, 0.0, self.probs[np.maximum(idx, 0)])
        return as_output(out, x)

    def quantile(self, p):
        arr = check_probability(p, 'y')
        idx = np.searchsorted(self.probs, arr, side='left')
        return as_output(self.knots[idx], p)

    @classmethod
    def from_csv(cls, path: str, name: Optional[str] = None) -> 'GridCdf':
        """Load a two-column (x, p) CSV file

        A header row is optional and detected by its first cell not being numeric

        Args:
            path: Path to the file
            name: Label for the distribution (default: the file name)
        Returns:
            (GridCdf) The tabulated distribution
        """
        frame = pd.read_csv(path, header=None)
        if frame.shape[1] < 2:
            raise DomainError(f'{path} must have two columns (x, p)')
        if pd.isna(pd.to_numeric(frame.iloc[0, :2], errors='coerce')).any():
            frame = frame.iloc[1:]
        values = frame.iloc[:, :2].apply(pd.to_numeric, errors='raise').to_numpy(dtype=float)
        logger.debug(f'Loaded {len(values)} knots from {path}')
        return cls(values[:, 0], values[:, 1], name=name or str(path))


def grid_quantile(F: GridCdf, y: ArrayLike) -> ArrayLike:
    """Generalized inverse of a step distribution function

    Args:
        F: Tabulated distribution
        y: Level(s) in [0, 1]
    Returns:
        Smallest knot x with F(x) >= y
    """
    return F.quantile(y)


@dataclass(frozen=True)
class ScaledCdf(Cdf):
    """The distribution function x -> F(a x) for a scale a > 0"""

    base: Cdf
    scale: float

    def __post_init__(self):
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise DomainError(f'scale must be a positive finite number, received {self.scale!r}')

    @property
    def has_density(self) -> bool:
        return self.base.has_density

    @property
    def support_lo(self) -> float:
        return self.base.support_lo / self.scale

    @property
    def label(self) -> str:
        return f'{self.base.label}({self.scale:g}x)'

    def _scaled(self, x):
        return np.asarray(x, dtype=float) * self.scale

    def cdf(self, x):
        return as_output(np.asarray(self.base.cdf(self._scaled(x))), x)

    def sf(self, x):
        return as_output(np.asarray(self.base.sf(self._scaled(x))), x)

    def logcdf(self, x):
        return as_output(np.asarray(self.base.logcdf(self._scaled(x))), x)

    def pdf(self, x):
        return as_output(self.scale * np.asarray(self.base.pdf(self._scaled(x))), x)

    def pdf_bounds(self, a, b):
        bounds = self.base.pdf_bounds(self._scaled(a), self._scaled(b))
        if bounds is None:
            return None
        lo, hi = bounds
        return self.scale * lo, self.scale * hi

    def breakpoints(self):
        return tuple(point / self.scale for point in self.base.breakpoints())

    def quantile(self, p):
        return as_output(np.asarray(self.base.quantile(p)) / self.scale, p)

    def isf(self, s):
        return as_output(np.asarray(self.base.isf(s)) / self.scale, s)


def scale_cdf(F: Cdf, a: float) -> ScaledCdf:
    """Lazily evaluated x -> F(a x)"""
    return ScaledCdf(F, float(a))
