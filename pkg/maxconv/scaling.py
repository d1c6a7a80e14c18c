"""Normalization sequences and the crossover scale rho

``a_n`` and ``a_n'`` solve F(a_n) = exp(-1/n) and F(a_n') = n/(n+1). The map
``rho<-(t) = t {alpha e / g(t) - (e + 1)}^(1 / (alpha - g(t)))`` balances the interior and
boundary errors of the Boolean approximation, and its inverse rho sets the scale at which
the auxiliary function is read off.
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from maxconv import config
from maxconv.distributions import Cdf, ConvolutionKind, EvDistribution
from maxconv.models.reports import ScalingTriple
from maxconv.utils.validation import ArrayLike, DomainError, SolverError, as_output, check_positive
from maxconv.vonmises import AuxFn

logger = logging.getLogger(__name__)

# Factor applied to t_min to stay inside the domain of rho<-
_LOWER_OFFSET = 1e-6


def _is_frechet(F: Cdf) -> bool:
    return isinstance(F, EvDistribution) and F.family.kind == ConvolutionKind.classical and F.alpha > 0


def scaling(F: Cdf, n: int) -> ScalingTriple:
    """Compute the normalization constants of a distribution

    Levels close to 1 are inverted through the survival channel. The classical Frechet
    law uses its closed forms a_n = n^(1/alpha) and a_n' = log(1 + 1/n)^(-1/alpha).

    Args:
        F: Distribution function
        n: Positive integer
    Returns:
        (ScalingTriple) a_n, a_n' and A_n = a_n / a_n'
    Raises:
        DomainError: If n is not a positive integer or a quantile is not a positive finite number
    """
    if int(n) != n or n < 1:
        raise DomainError(f'n must be a positive integer, received {n!r}')
    n = int(n)

    if _is_frechet(F):
        inv = 1 / F.alpha
        a_n = n ** inv
        a_n_prime = math.log1p(1 / n) ** -inv
        A_n = (n * math.log1p(1 / n)) ** inv
    else:
        a_n = float(F.isf(-math.expm1(-1 / n)))
        a_n_prime = float(F.isf(1 / (n + 1)))
        for name, value in [('a_n', a_n), ('a_n_prime', a_n_prime)]:
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f'{name} for {F.label} at n={n} is {value!r}; the quantile must be positive and finite')
        A_n = a_n / a_n_prime
    return ScalingTriple(n=n, a_n=a_n, a_n_prime=a_n_prime, A_n=A_n)


def _threshold(alpha: float) -> float:
    """Level alpha e / (e + 1) that g must drop below for rho<- to be defined"""
    return alpha * math.e / (math.e + 1)


class RhoSolver:
    """Evaluates rho<- and its inverse rho for a tail index and auxiliary function

    Args:
        alpha: Tail index
        g: Auxiliary function, assumed non-increasing and vanishing at infinity
    Raises:
        SolverError: If g never drops below alpha e / (e + 1)
    """

    def __init__(self, alpha: float, g: AuxFn):
        self.alpha = check_positive(alpha, 'alpha')
        self.g = g
        self.t_min = self._find_t_min()
        logger.debug(f'rho<- for alpha={alpha:g}, g={g.label} is defined for t > {self.t_min!r}')

    def __repr__(self):
        return f'RhoSolver(alpha={self.alpha!r}, g={self.g.label!r}, t_min={self.t_min!r})'

    def _find_t_min(self) -> float:
        """Smallest t with g(t) < alpha e / (e + 1), located by doubling then bisection"""
        level = _threshold(self.alpha)
        lo = self.g.valid_from
        if self.g(lo) < level:
            return lo

        hi = 2 * lo
        for _ in range(config.MAX_DOUBLINGS):
            if self.g(hi) < level:
                break
            lo, hi = hi, 2 * hi
        else:
            raise SolverError(f'{self.g.label} stays above {level:g} up to t={hi:g}; rho<- is undefined')

        xtol = config.BISECTION_RTOL * hi
        root = bisect(lambda t: self.g(t) - level, lo, hi, xtol=xtol, maxiter=500)

        # Move to the side of the crossing where g is below the threshold
        step = xtol
        while not self.g(root) < level:
            root, step = root + step, 2 * step
        return float(root)

    def log_rho_inverse(self, t: ArrayLike) -> ArrayLike:
        """Logarithm of rho<-(t), evaluated without forming the (possibly huge) power

        Raises:
            DomainError: If t <= t_min
        """
        arr = np.asarray(t, dtype=float)
        if np.any(~(arr > self.t_min)):
            raise DomainError(f'rho<- is defined for t > {self.t_min!r}')
        gt = np.asarray(self.g(arr), dtype=float)
        base = self.alpha * math.e / gt - (math.e + 1)
        if np.any(base <= 0):
            raise DomainError(f'rho<- base is not positive at t={arr[base <= 0].ravel()[0]!r}; g is not monotone there')
        return as_output(np.log(arr) + np.log(base) / (self.alpha - gt), t)

    def rho_inverse(self, t: ArrayLike) -> ArrayLike:
        """rho<-(t) = t {alpha e / g(t) - (e + 1)}^(1 / (alpha - g(t)))

        Raises:
            DomainError: If t <= t_min
        """
        with np.errstate(over='ignore'):
            return as_output(np.exp(np.asarray(self.log_rho_inverse(t))), t)

    @property
    def lower_t(self) -> float:
        """Left end of the bracket used when inverting rho<-"""
        return self.t_min * (1 + _LOWER_OFFSET)

    @property
    def x_min(self) -> float:
        """Smallest x at which rho is evaluated"""
        return float(self.rho_inverse(self.lower_t))

    def rho(self, x: float) -> float:
        """The t with rho<-(t) = x

        Brackets the root by doubling t from just above t_min, then bisects in log t.

        Raises:
            DomainError: If x is below the range of rho<- on the bracket
            SolverError: If the bracket cannot be expanded or the residual is too large
        """
        x = check_positive(x, 'x')
        target = math.log(x)

        def residual(log_t):
            return float(self.log_rho_inverse(math.exp(log_t))) - target

        lo = self.lower_t
        if residual(math.log(lo)) > 0:
            raise DomainError(f'x={x!r} is below the range of rho<- (which starts at {self.x_min!r})')
        hi = 2 * lo
        for _ in range(config.MAX_DOUBLINGS):
            if residual(math.log(hi)) >= 0:
                break
            lo, hi = hi, 2 * hi
        else:
            raise SolverError(f'Failed to bracket rho({x!r}): rho<-({hi:g}) is still below x')

        try:
            log_t = bisect(residual, math.log(lo), math.log(hi), xtol=1e-13, maxiter=500)
        except RuntimeError as exc:
            raise SolverError(f'Bisection for rho({x!r}) failed on [{lo!r}, {hi!r}]: {exc}') from exc

        t = math.exp(log_t)
        relative = abs(math.expm1(residual(log_t)))
        if relative > config.RHO_RESIDUAL:
            raise SolverError(f'rho({x!r}) = {t!r} has relative residual {relative:.3g}')
        return t


def rho_inverse(solver: RhoSolver, t: ArrayLike) -> ArrayLike:
    """Evaluate rho<-(t) with a solver"""
    return solver.rho_inverse(t)


def rho(solver: RhoSolver, x: float) -> float:
    """Evaluate rho(x), the inverse of rho<-"""
    return solver.rho(x)


def frechet_rho_inverse(alpha: float, t: ArrayLike) -> ArrayLike:
    """rho<- for the Frechet auxiliary function alpha / (t^alpha - 1)

    Equal to t {e t^alpha - (2e + 1)}^((t^alpha - 1) / (alpha t^alpha - 2 alpha))

    Raises:
        DomainError: If e t^alpha <= 2e + 1
    """
    arr = np.asarray(t, dtype=float)
    ta = np.power(arr, alpha)
    base = math.e * ta - (2 * math.e + 1)
    if np.any(~(base > 0)):
        raise DomainError(f'the Frechet form of rho<- needs t^alpha > {(2 * math.e + 1) / math.e:g}')
    exponent = (ta - 1) / (alpha * ta - 2 * alpha)
    with np.errstate(over='ignore'):
        return as_output(np.exp(np.log(arr) + exponent * np.log(base)), t)


def frechet_rho_asymptotic(alpha: float, x: ArrayLike) -> ArrayLike:
    """Leading term exp(-1 / (2 alpha)) sqrt(x) of rho for the Frechet auxiliary function"""
    arr = np.asarray(x, dtype=float)
    return as_output(math.exp(-0.5 / alpha) * np.sqrt(arr), x)


def frechet_g_rho(alpha: float, n: ArrayLike) -> ArrayLike:
    """Leading term alpha e^(1/2) n^(-1/2) of g(rho(a_n)) for the Frechet law"""
    arr = np.asarray(n, dtype=float)
    return as_output(alpha * math.exp(0.5) / np.sqrt(arr), n)


def g_at_rho(solver: RhoSolver, a_n: float) -> Optional[float]:
    """g(rho(a_n)), or None when a_n is below the range of rho<-"""
    try:
        return float(solver.g(solver.rho(a_n)))
    except DomainError:
        return None
