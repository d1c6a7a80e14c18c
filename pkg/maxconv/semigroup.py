"""Max-convolution powers and the Boolean semigroup on [0, 1]

The Boolean operation is defined through ``(u * v)^-1 - 1 = (u^-1 - 1) + (v^-1 - 1)`` and
the map ``X(u) = exp(1 - 1/u)`` carries it onto ordinary multiplication. Powers are
evaluated on the survival channel ``s = 1 - u`` so that levels within 1e-8 of 1 keep
their significant digits.

Point-level functions accept scalars or arrays. Powers ``n`` are real numbers >= 1.
"""
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from maxconv.distributions import Cdf, ConvolutionKind
from maxconv.utils.validation import ArrayLike, as_output, check_power, check_unit

logger = logging.getLogger(__name__)

KindLike = Union[str, ConvolutionKind]


def boolean_combine(u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """Boolean max-convolution of two levels

    Args:
        u, v: Levels in [0, 1]
    Returns:
        r with ``1/r - 1 = (1/u - 1) + (1/v - 1)``, and 0 if either input is 0
    Raises:
        DomainError: If an input is outside [0, 1]
    """
    uu = check_unit(u, 'u')
    vv = check_unit(v, 'v')
    with np.errstate(divide='ignore', invalid='ignore'):
        # u + v - uv written as 1 - (1-u)(1-v) so it stays accurate near 1
        out = np.where((uu > 0) & (vv > 0), uu * vv / (1.0 - (1.0 - uu) * (1.0 - vv)), 0.0)
    return as_output(out, u if np.ndim(v) == 0 else v)


def _boolean_cdf_from_sf(s: np.ndarray, n: float) -> np.ndarray:
    return (1.0 - s) / (1.0 + (n - 1.0) * s)


def _boolean_sf_from_sf(s: np.ndarray, n: float) -> np.ndarray:
    return n * s / (1.0 + (n - 1.0) * s)


def _free_cdf_from_sf(s: np.ndarray, n: float) -> np.ndarray:
    return np.maximum(1.0 - n * s, 0.0)


def _free_sf_from_sf(s: np.ndarray, n: float) -> np.ndarray:
    return np.minimum(n * s, 1.0)


def boolean_power_point(u: ArrayLike, n: float) -> ArrayLike:
    """n-fold Boolean power of a level: u / (n - (n-1) u)"""
    s = 1.0 - check_unit(u)
    return as_output(_boolean_cdf_from_sf(s, check_power(n)), u)


def free_power_point(u: ArrayLike, n: float) -> ArrayLike:
    """n-fold free power of a level: max(n u - (n-1), 0)"""
    s = 1.0 - check_unit(u)
    return as_output(_free_cdf_from_sf(s, check_power(n)), u)


def classical_power_point(u: ArrayLike, n: float) -> ArrayLike:
    """n-fold classical power of a level: u^n"""
    uu = check_unit(u)
    return as_output(np.power(uu, check_power(n)), u)


_POINT_POWERS = {
    ConvolutionKind.classical: classical_power_point,
    ConvolutionKind.free: free_power_point,
    ConvolutionKind.boolean: boolean_power_point,
}


def power_point(u: ArrayLike, n: float, kind: KindLike) -> ArrayLike:
    """n-fold power of a level in the chosen calculus"""
    return _POINT_POWERS[ConvolutionKind(kind)](u, n)


def x_map(u: ArrayLike) -> ArrayLike:
    """The isomorphism X(u) = exp(1 - 1/u) onto ([0, 1], *), with X(0) = 0"""
    uu = check_unit(u)
    with np.errstate(divide='ignore', over='ignore', under='ignore'):
        out = np.where(uu > 0, np.exp(-(1.0 - uu) / np.where(uu > 0, uu, 1.0)), 0.0)
    return as_output(out, u)


def x_inv(u: ArrayLike) -> ArrayLike:
    """The inverse isomorphism 1 / (1 - log u), with value 0 at 0"""
    uu = check_unit(u)
    with np.errstate(divide='ignore'):
        out = np.where(uu > 0, 1.0 / (1.0 - np.log(np.where(uu > 0, uu, 1.0))), 0.0)
    return as_output(out, u)


@dataclass(frozen=True)
class PoweredCdf(Cdf):
    """The n-fold max-convolution power of a distribution function, evaluated lazily"""

    base: Cdf
    n: float
    kind: ConvolutionKind

    def __post_init__(self):
        object.__setattr__(self, 'n', check_power(self.n))
        object.__setattr__(self, 'kind', ConvolutionKind(self.kind))

    @property
    def has_density(self) -> bool:
        # The free power has a kink where n F = n - 1
        return self.base.has_density and self.kind != ConvolutionKind.free

    @property
    def support_lo(self) -> float:
        if self.kind == ConvolutionKind.free:
            return float(self.base.isf(1.0 / self.n))
        return self.base.support_lo

    @property
    def label(self) -> str:
        return f'{self.kind.value}^{self.n:g}[{self.base.label}]'

    def cdf(self, x):
        if self.kind == ConvolutionKind.classical:
            with np.errstate(under='ignore'):
                return as_output(np.exp(self.n * np.asarray(self.base.logcdf(x), dtype=float)), x)
        s = np.asarray(self.base.sf(x), dtype=float)
        if self.kind == ConvolutionKind.boolean:
            return as_output(_boolean_cdf_from_sf(s, self.n), x)
        return as_output(_free_cdf_from_sf(s, self.n), x)

    def sf(self, x):
        if self.kind == ConvolutionKind.classical:
            return as_output(-np.expm1(self.n * np.asarray(self.base.logcdf(x), dtype=float)), x)
        s = np.asarray(self.base.sf(x), dtype=float)
        if self.kind == ConvolutionKind.boolean:
            return as_output(_boolean_sf_from_sf(s, self.n), x)
        return as_output(_free_sf_from_sf(s, self.n), x)

    def pdf(self, x):
        if not self.has_density:
            return super().pdf(x)
        f = np.asarray(self.base.pdf(x), dtype=float)
        if self.kind == ConvolutionKind.boolean:
            s = np.asarray(self.base.sf(x), dtype=float)
            return as_output(self.n * f / (1.0 + (self.n - 1.0) * s) ** 2, x)
        with np.errstate(under='ignore'):
            scale = np.exp((self.n - 1.0) * np.asarray(self.base.logcdf(x), dtype=float))
        return as_output(self.n * scale * f, x)

    def pdf_bounds(self, a, b):
        """Density enclosure from the base enclosure and the factor multiplying f

        The factor n / (1 + (n-1) s)^2, n F^(n-1) or n 1{n s < 1} is non-decreasing in x,
        so its values at the cell ends bound it. The free power is absolutely continuous
        despite its kink, so it gets an enclosure although it has no pointwise density.
        """
        bounds = self.base.pdf_bounds(a, b)
        if bounds is None:
            return None
        f_lo, f_hi = bounds
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n = self.n
        if self.kind == ConvolutionKind.boolean:
            c_lo = n / (1.0 + (n - 1.0) * np.asarray(self.base.sf(a), dtype=float)) ** 2
            c_hi = n / (1.0 + (n - 1.0) * np.asarray(self.base.sf(b), dtype=float)) ** 2
        elif self.kind == ConvolutionKind.classical:
            # 0 * log 0 is NaN for n = 1, where the factor is 1
            with np.errstate(under='ignore', invalid='ignore'):
                c_lo = n * np.exp((n - 1.0) * np.asarray(self.base.logcdf(a), dtype=float))
                c_hi = n * np.exp((n - 1.0) * np.asarray(self.base.logcdf(b), dtype=float))
            c_lo, c_hi = np.nan_to_num(c_lo, nan=n), np.nan_to_num(c_hi, nan=n)
        else:
            c_lo = np.where(n * np.asarray(self.base.sf(a), dtype=float) < 1.0, n, 0.0)
            c_hi = np.where(n * np.asarray(self.base.sf(b), dtype=float) <= 1.0, n, 0.0)
        with np.errstate(invalid='ignore'):
            return f_lo * c_lo, np.where(c_hi > 0, f_hi * c_hi, 0.0)

    def breakpoints(self):
        if self.kind == ConvolutionKind.free:
            return self.base.breakpoints() + (self.support_lo,)
        return self.base.breakpoints()

    def quantile(self, p):
        y = check_unit(p, 'p')
        with np.errstate(divide='ignore'):
            if self.kind == ConvolutionKind.boolean:
                base_sf = (1.0 - y) / (1.0 + (self.n - 1.0) * y)
            elif self.kind == ConvolutionKind.free:
                base_sf = (1.0 - y) / self.n
            else:
                base_sf = -np.expm1(np.log(y) / self.n)
        return as_output(np.asarray(self.base.isf(base_sf)), p)

    def isf(self, s):
        S = check_unit(s, 's')
        if self.kind == ConvolutionKind.boolean:
            base_sf = S / (self.n - (self.n - 1.0) * S)
        elif self.kind == ConvolutionKind.free:
            base_sf = S / self.n
        else:
            base_sf = -np.expm1(np.log1p(-S) / self.n)
        return as_output(np.asarray(self.base.isf(base_sf)), s)


def power_cdf(F: Cdf, n: float, kind: KindLike) -> PoweredCdf:
    """n-fold max-convolution power of a distribution function

    Args:
        F: Distribution function
        n: Power, a real number >= 1
        kind: Calculus (classical, free or boolean)
    Returns:
        (PoweredCdf) Lazily evaluated power, with a density for the classical and Boolean kinds
    """
    return PoweredCdf(F, n, ConvolutionKind(kind))


@dataclass(frozen=True)
class XTransformCdf(Cdf):
    """X(F): the distribution function x -> exp(1 - 1/F(x))"""

    base: Cdf

    @property
    def has_density(self) -> bool:
        return self.base.has_density

    @property
    def support_lo(self) -> float:
        return self.base.support_lo

    @property
    def label(self) -> str:
        return f'X[{self.base.label}]'

    def _ratio(self, x):
        """(1 - F) / F, infinite where F vanishes"""
        u = np.asarray(self.base.cdf(x), dtype=float)
        s = np.asarray(self.base.sf(x), dtype=float)
        with np.errstate(divide='ignore'):
            return np.where(u > 0, s / np.where(u > 0, u, 1.0), np.inf), u

    def cdf(self, x):
        ratio, _ = self._ratio(x)
        with np.errstate(under='ignore'):
            return as_output(np.exp(-ratio), x)

    def sf(self, x):
        ratio, _ = self._ratio(x)
        return as_output(-np.expm1(-ratio), x)

    def logcdf(self, x):
        ratio, _ = self._ratio(x)
        return as_output(-ratio, x)

    def pdf(self, x):
        ratio, u = self._ratio(x)
        f = np.asarray(self.base.pdf(x), dtype=float)
        with np.errstate(divide='ignore', invalid='ignore', under='ignore'):
            out = np.where(u > 0, np.exp(-ratio) * f / np.where(u > 0, u, 1.0) ** 2, 0.0)
        return as_output(out, x)

    def quantile(self, p):
        y = check_unit(p, 'p')
        with np.errstate(divide='ignore'):
            big = -np.log(y)
        # Levels below 1/2 are inverted through the base CDF, the rest through its survival
        low = np.asarray(self.base.quantile(1.0 / (1.0 + big)))
        finite = np.isfinite(big)
        high = np.asarray(self.base.isf(np.where(finite, big / (1.0 + np.where(finite, big, 0.0)), 1.0)))
        return as_output(np.where(y <= 0.5, low, high), p)

    def isf(self, s):
        S = check_unit(s, 's')
        with np.errstate(divide='ignore'):
            big = -np.log1p(-S)
            base_sf = np.where(np.isfinite(big), big / (1.0 + np.where(np.isfinite(big), big, 0.0)), 1.0)
        return as_output(np.asarray(self.base.isf(base_sf)), s)


@dataclass(frozen=True)
class XInverseTransformCdf(Cdf):
    """X<-1>(F): the distribution function x -> 1 / (1 - log F(x))"""

    base: Cdf

    @property
    def has_density(self) -> bool:
        return self.base.has_density

    @property
    def support_lo(self) -> float:
        return self.base.support_lo

    @property
    def label(self) -> str:
        return f'X^-1[{self.base.label}]'

    def _neglog(self, x):
        return -np.asarray(self.base.logcdf(x), dtype=float)

    def cdf(self, x):
        return as_output(1.0 / (1.0 + self._neglog(x)), x)

    def sf(self, x):
        L = self._neglog(x)
        with np.errstate(invalid='ignore'):
            return as_output(np.where(np.isfinite(L), L / (1.0 + L), 1.0), x)

    def logcdf(self, x):
        return as_output(-np.log1p(self._neglog(x)), x)

    def pdf(self, x):
        L = self._neglog(x)
        u = np.asarray(self.base.cdf(x), dtype=float)
        f = np.asarray(self.base.pdf(x), dtype=float)
        with np.errstate(divide='ignore', invalid='ignore'):
            out = np.where(u > 0, f / (np.where(u > 0, u, 1.0) * (1.0 + L) ** 2), 0.0)
        return as_output(out, x)

    def quantile(self, p):
        y = check_unit(p, 'p')
        with np.errstate(divide='ignore'):
            L = (1.0 - y) / y
        # Base level exp(-L): below 1/2 invert the base CDF directly, above through its survival
        low = np.asarray(self.base.quantile(np.exp(-L)))
        high = np.asarray(self.base.isf(-np.expm1(-L)))
        return as_output(np.where(y <= 0.5, low, high), p)

    def isf(self, s):
        S = check_unit(s, 's')
        with np.errstate(divide='ignore'):
            L = S / (1.0 - S)
        low = np.asarray(self.base.quantile(np.exp(-L)))
        high = np.asarray(self.base.isf(-np.expm1(-L)))
        return as_output(np.where(S >= 0.5, low, high), s)


def x_transform(F: Cdf) -> XTransformCdf:
    """Apply the isomorphism X pointwise to a distribution function"""
    return XTransformCdf(F)


def x_inverse_transform(F: Cdf) -> XInverseTransformCdf:
    """Apply the inverse isomorphism pointwise to a distribution function"""
    return XInverseTransformCdf(F)
