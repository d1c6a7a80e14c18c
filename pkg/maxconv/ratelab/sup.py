"""Certified Kolmogorov distance between two distribution functions

For non-decreasing F and G and a cell [a, b], every x in the cell satisfies
``|F(x) - G(x)| <= max(F(b) - G(a), G(b) - F(a), 0)``. When both laws also enclose their
densities on the cell, D = F - G has bounded slope there and the sup of |D| on the cell is
at most the peak of two lines through D(a) and D(b). That bound exceeds the true sup by
an amount quadratic in the cell width. The maximum of the cell bounds over a subdivision
is a certified upper bound, and the values at the cell ends give a lower bound.
Cells whose bound cannot exceed the current lower bound by more than the tolerance are
retired; the rest are split until the bracket closes or the cell budget runs out. The starting
subdivision includes the points where either density jumps, blows up or has a corner.
"""
import logging
import math
from typing import Optional

import numpy as np

from maxconv import config
from maxconv.distributions import Cdf
from maxconv.models.reports import SupBracket
from maxconv.utils.validation import DomainError, check_positive

logger = logging.getLogger(__name__)


def _initial_edges(x_lo: float, x_hi: float, cells: int, breakpoints: tuple = ()) -> np.ndarray:
    """Even (geometric when x_lo > 0) subdivision of the window, with the breakpoints inside it added as edges"""
    if x_lo > 0:
        edges = np.geomspace(x_lo, x_hi, cells + 1)
    else:
        edges = np.linspace(x_lo, x_hi, cells + 1)
    inner = [float(p) for p in breakpoints if math.isfinite(p) and x_lo < p < x_hi]
    return np.union1d(edges, inner) if inner else edges


def _midpoints(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric midpoints for cells in (0, inf), arithmetic otherwise"""
    positive = a > 0
    with np.errstate(invalid='ignore'):
        geometric = np.sqrt(np.where(positive, a, 1.) * np.where(positive, b, 1.))
    return np.where(positive, geometric, 0.5 * (a + b))


def _same_law(F: Cdf, G: Cdf) -> bool:
    try:
        return bool(F is G or F == G)
    except (TypeError, ValueError):
        return False


def _tent(d_a: np.ndarray, d_b: np.ndarray, slope_lo: np.ndarray, slope_hi: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Upper bound on D over [0, h] given D(0), D(h) and slope_lo <= D' <= slope_hi

    D lies below d_a + slope_hi t and below d_b - slope_lo (h - t), so its sup is at most
    the peak of the smaller of the two lines. Infinite slopes give an infinite bound.
    """
    finite = np.isfinite(slope_lo) & np.isfinite(slope_hi)
    lo = np.where(finite, slope_lo, 0.)
    hi = np.where(finite, slope_hi, 0.)
    spread = hi - lo
    with np.errstate(divide='ignore', invalid='ignore'):
        t = np.clip(np.where(spread > 0, (d_b - d_a - lo * h) / spread, 0.), 0., h)
    peak = np.minimum(d_a + hi * t, d_b - lo * (h - t))
    return np.where(finite, np.maximum(peak, np.maximum(d_a, d_b)), np.inf)


def _cell_bounds(F: Cdf, G: Cdf, a: np.ndarray, b: np.ndarray, fa: np.ndarray, fb: np.ndarray,
                 ga: np.ndarray, gb: np.ndarray, use_density: bool) -> np.ndarray:
    """Upper bound on |F - G| over each cell

    The monotone bound is first order in the cell width. Where both laws have density
    enclosures, the tent bound on F - G and G - F is second order and the smaller is kept.
    """
    bound = np.maximum(np.maximum(fb - ga, gb - fa), 0.)
    if not use_density or a.size == 0:
        return bound
    f_bounds = F.pdf_bounds(a, b)
    g_bounds = G.pdf_bounds(a, b)
    if f_bounds is None or g_bounds is None:
        return bound
    (f_lo, f_hi), (g_lo, g_hi) = f_bounds, g_bounds
    with np.errstate(invalid='ignore'):
        slope_lo, slope_hi = f_lo - g_hi, f_hi - g_lo
    h = b - a
    d_a, d_b = fa - ga, fb - gb
    above = _tent(d_a, d_b, slope_lo, slope_hi, h)
    below = _tent(-d_a, -d_b, -slope_hi, -slope_lo, h)
    tent = np.maximum(np.maximum(above, below), 0.)
    return np.minimum(bound, np.where(np.isnan(tent), np.inf, tent))


def tail_window(F: Cdf, G: Cdf, mass: float) -> tuple:
    """Window outside of which both laws put at most ``mass`` on each side"""
    x_lo = min(float(F.quantile(mass)), float(G.quantile(mass)))
    x_hi = max(float(F.isf(mass)), float(G.isf(mass)))
    return x_lo, x_hi


def sup_distance(F: Cdf, G: Cdf, x_lo: float, x_hi: float, tol: float,
                 lower_tail: bool = False, upper_tail: bool = False,
                 initial_cells: int = config.INITIAL_CELLS,
                 cell_budget: int = config.CELL_BUDGET, use_density: bool = True) -> SupBracket:
    """Certified bracket on sup |F(x) - G(x)|

    Args:
        F, G: Distribution functions, non-decreasing on the window
        x_lo, x_hi: Window to subdivide
        tol: Target width of the bracket
        lower_tail: Extend the sup to (-inf, x_lo] using the bound max(F(x_lo), G(x_lo))
        upper_tail: Extend the sup to [x_hi, inf) using the bound max(1 - F(x_hi), 1 - G(x_hi))
        initial_cells: Cells in the starting subdivision
        cell_budget: Maximum number of cells to evaluate before giving up
        use_density: Tighten the cell bounds with the density enclosures of F and G, when both have one
    Returns:
        (SupBracket) Bracket, flagged as not converged if the budget ran out or the
            tail bounds are too large for the tolerance
    """
    tol = check_positive(tol, 'tol')
    x_lo, x_hi = float(x_lo), float(x_hi)
    if not (math.isfinite(x_lo) and math.isfinite(x_hi) and x_lo < x_hi):
        raise DomainError(f'window must be finite with x_lo < x_hi, received [{x_lo!r}, {x_hi!r}]')

    if _same_law(F, G):
        return SupBracket(lo=0., hi=0., witness_x=None, x_lo=x_lo, x_hi=x_hi, cells_used=0, converged=True)

    tail_bound = 0.
    if lower_tail:
        tail_bound = max(tail_bound, float(F.cdf(x_lo)), float(G.cdf(x_lo)))
    if upper_tail:
        tail_bound = max(tail_bound, float(F.sf(x_hi)), float(G.sf(x_hi)))

    # Values at the starting edges
    edges = _initial_edges(x_lo, x_hi, initial_cells, F.breakpoints() + G.breakpoints())
    f_edges = np.asarray(F.cdf(edges), dtype=float)
    g_edges = np.asarray(G.cdf(edges), dtype=float)
    diff = np.abs(f_edges - g_edges)
    best = int(np.argmax(diff))
    lo, witness = float(diff[best]), float(edges[best])

    a, b = edges[:-1], edges[1:]
    fa, fb = f_edges[:-1], f_edges[1:]
    ga, gb = g_edges[:-1], g_edges[1:]
    retired_hi = 0.
    cells_used = edges.size - 1
    exhausted = False

    for _ in range(config.MAX_REFINEMENTS):
        bound = _cell_bounds(F, G, a, b, fa, fb, ga, gb, use_density)

        # Retire cells that can no longer widen the bracket beyond the tolerance
        settled = bound <= lo + tol
        if np.any(settled):
            retired_hi = max(retired_hi, float(bound[settled].max()))
            keep = ~settled
            a, b, fa, fb, ga, gb, bound = a[keep], b[keep], fa[keep], fb[keep], ga[keep], gb[keep], bound[keep]
        if a.size == 0:
            break

        # Cells too narrow to split in floating point stay as they are
        mid = _midpoints(a, b)
        stuck = (mid <= a) | (mid >= b)
        if np.any(stuck):
            retired_hi = max(retired_hi, float(bound[stuck].max()))
            keep = ~stuck
            a, b, fa, fb, ga, gb, mid = a[keep], b[keep], fa[keep], fb[keep], ga[keep], gb[keep], mid[keep]
            if a.size == 0:
                break

        if cells_used + 2 * a.size > cell_budget:
            exhausted = True
            break

        f_mid = np.asarray(F.cdf(mid), dtype=float)
        g_mid = np.asarray(G.cdf(mid), dtype=float)
        d_mid = np.abs(f_mid - g_mid)
        best = int(np.argmax(d_mid))
        if d_mid[best] > lo:
            lo, witness = float(d_mid[best]), float(mid[best])

        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        fa, fb = np.concatenate([fa, f_mid]), np.concatenate([f_mid, fb])
        ga, gb = np.concatenate([ga, g_mid]), np.concatenate([g_mid, gb])
        cells_used += 2 * mid.size
    else:
        exhausted = True

    active_hi = 0.
    if a.size > 0:
        active_hi = float(_cell_bounds(F, G, a, b, fa, fb, ga, gb, use_density).max())
    hi = max(lo, retired_hi, active_hi, tail_bound)
    converged = not exhausted and hi - lo <= tol

    if exhausted:
        logger.warning(f'Cell budget exhausted after {cells_used} cells: bracket [{lo:.3g}, {hi:.3g}] is wider than {tol:g}')
    elif not converged:
        logger.warning(f'Bracket [{lo:.3g}, {hi:.3g}] did not reach tolerance {tol:g} (tail bound {tail_bound:.3g})')
    logger.debug(f'sup |{F.label} - {G.label}| in [{lo:.6g}, {hi:.6g}] after {cells_used} cells')
    return SupBracket(lo=lo, hi=hi, witness_x=witness, x_lo=x_lo, x_hi=x_hi, tail_bound=tail_bound,
                      cells_used=cells_used, converged=converged)


def sup_distance_full_line(F: Cdf, G: Cdf, tol: float, mass: Optional[float] = None) -> SupBracket:
    """sup |F - G| over the whole real line

    The window is chosen from the quantiles of both laws so that each tail closure term
    is at most ``mass`` (default: the smaller of ``TAIL_MASS`` and ``tol / 2``).
    """
    if mass is None:
        mass = min(config.TAIL_MASS, tol / 2)
    x_lo, x_hi = tail_window(F, G, mass)
    return sup_distance(F, G, x_lo, x_hi, tol, lower_tail=True, upper_tail=True)
