"""Rate experiments: certified distances of normalized powers to their limit laws

For each n the experiment computes the normalization constants, the certified sup over
the real line of |F^{n}(a_n x) - Phi(x)| in the chosen calculus, and the explicit bounds the
distance is compared with:

- ``bound_A``: alpha (1/A_n - 1), the cost of switching from the scale a_n' to a_n
- ``bound_interior``: g(rho(a_n)) / (e (alpha - g(rho(a_n)))), the error on (0, 1)
- ``bound_tail``: u(a_n) / (e (alpha - u(a_n))) + n r(exp(-1/n)) with
  u(a_n) = g(a_n) + alpha ell(exp(-1/n)), plus 1 - exp(-1/n) in the Boolean calculus,
  the error on [1, inf)
"""
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from maxconv import config
from maxconv.distributions import Cdf, ConvolutionKind, EvDistribution, EvFamily, limit_law, scale_cdf
from maxconv.models.reports import InteriorReport, InteriorRow, RateFit, RateReport, RateRow, ScalingTriple
from maxconv.ratelab.sup import sup_distance, sup_distance_full_line
from maxconv.scaling import RhoSolver, scaling
from maxconv.semigroup import power_cdf
from maxconv.utils.futures import parallel_map
from maxconv.utils.validation import DomainError, SolverError, check_positive
from maxconv.vonmises import AuxFn, ell_survival, frechet_aux, r_survival, verify_von_mises

logger = logging.getLogger(__name__)

DistributionLike = Union[Cdf, EvFamily]


def _as_cdf(F: DistributionLike) -> Cdf:
    if isinstance(F, EvFamily):
        return EvDistribution(F)
    return F


def _is_frechet(F: Cdf) -> bool:
    return isinstance(F, EvDistribution) and F.family.kind == ConvolutionKind.classical and F.alpha > 0


def _edge_ratio(value: Optional[float], alpha: float) -> Optional[float]:
    """value / (e (alpha - value)), None when undefined"""
    if value is None or not value < alpha:
        return None
    return value / (math.e * (alpha - value))


def free_tail_bound(F: Cdf, alpha: float, g: AuxFn, n: int, triple: Optional[ScalingTriple] = None) -> Optional[float]:
    """Bound on sup over x >= 1 of |F^{free n}(a_n x) - Phi^free(x)|

    Returns:
        u(a_n) / (e (alpha - u(a_n))) + n r(exp(-1/n)), or None when a_n < g.valid_from
        or u(a_n) >= alpha
    """
    triple = triple or scaling(F, n)
    if triple.a_n < g.valid_from:
        return None
    s = -math.expm1(-1 / n)
    u_value = float(g(triple.a_n)) + alpha * float(ell_survival(s))
    edge = _edge_ratio(u_value, alpha)
    if edge is None:
        return None
    return edge + n * float(r_survival(s))


def boolean_tail_bound(F: Cdf, alpha: float, g: AuxFn, n: int, triple: Optional[ScalingTriple] = None) -> Optional[float]:
    """Bound on sup over x >= 1 of |F^{boolean n}(a_n x) - Phi^b(x)|: the free bound plus 1 - F(a_n)"""
    free = free_tail_bound(F, alpha, g, n, triple)
    if free is None:
        return None
    return free - math.expm1(-1 / n)


def interior_bound(solver: Optional[RhoSolver], a_n: float) -> Tuple[Optional[float], Optional[float], Optional[float]]:
    """rho(a_n), g(rho(a_n)) and the interior bound, each None where undefined"""
    if solver is None:
        return None, None, None
    try:
        t = solver.rho(a_n)
    except (DomainError, SolverError) as exc:
        logger.debug(f'rho({a_n!r}) is undefined: {exc}')
        return None, None, None
    g_rho = float(solver.g(t))
    return t, g_rho, _edge_ratio(g_rho, solver.alpha)


def onset(ns: Sequence[int], holds: Sequence[bool]) -> Optional[int]:
    """Smallest n from which every later row holds, None if the last row fails"""
    n0 = None
    for n, ok in zip(reversed(list(ns)), reversed(list(holds))):
        if not ok:
            break
        n0 = n
    return n0


def fit_rate(rows: Sequence[Tuple[float, float]], converged: Optional[Sequence[bool]] = None) -> RateFit:
    """Least-squares fit of log(sup) against log(n)

    Args:
        rows: (n, sup) pairs. Rows with sup <= 0 are left out of the fit
        converged: Whether each row's bracket closed; unconverged rows are left out too
    Returns:
        (RateFit) slope, intercept and the largest absolute error in log space
    Raises:
        DomainError: If fewer than 4 usable rows remain
    """
    if converged is None:
        converged = [True] * len(rows)
    keep = [s > 0 and ok for (_, s), ok in zip(rows, converged)]
    used = [row for row, k in zip(rows, keep) if k]
    excluded = [int(n) for (n, _), k in zip(rows, keep) if not k]
    if excluded:
        logger.info(f'Excluded {len(excluded)} rows with non-positive sup or an open bracket from the fit')
    if len(used) < 4:
        raise DomainError(f'fitting a rate requires at least 4 usable rows, received {len(used)}')

    log_n = np.log([n for n, _ in used])
    log_s = np.log([s for _, s in used])
    fit = linregress(log_n, log_s)
    residual = float(np.max(np.abs(log_s - (fit.intercept + fit.slope * log_n))))
    return RateFit(slope=float(fit.slope), intercept=float(fit.intercept), residual=residual, used=len(used), excluded=excluded)


def _rate_row(F: Cdf, alpha: float, g: AuxFn, solver: Optional[RhoSolver], n: int,
              kind: ConvolutionKind, tol: float, limit: Cdf) -> Tuple[RateRow, List[str]]:
    """Measure one value of n. Returns the row and any failed unconditional assertion"""
    triple = scaling(F, n)
    powered = power_cdf(scale_cdf(F, triple.a_n), n, kind)
    bracket = sup_distance_full_line(powered, limit, tol)

    bound_A = alpha * (1 / triple.A_n - 1)
    _, _, bound_interior = interior_bound(solver, triple.a_n)
    assertions = []
    if not bracket.converged:
        logger.warning(f'n={n}: bracket [{bracket.lo!r}, {bracket.hi!r}] did not close to tol={tol!r}')
    if kind == ConvolutionKind.boolean:
        bound_tail = boolean_tail_bound(F, alpha, g, n, triple)
        holds = (bracket.converged and bound_tail is not None and bound_interior is not None
                 and bracket.hi <= bound_tail + bound_interior + bound_A)
    elif kind == ConvolutionKind.free:
        bound_tail = free_tail_bound(F, alpha, g, n, triple)
        holds = bracket.converged and bound_tail is not None and bracket.hi <= bound_tail
        if _is_frechet(F) and bracket.hi > 1 / n + tol:
            assertions.append(f'n={n}: sup_hi={bracket.hi!r} exceeds 1/n + tol')
    else:
        # The classical power is a baseline without an asserted bound
        bound_tail = None
        holds = bracket.converged

    row = RateRow(n=n, a_n=triple.a_n, a_n_prime=triple.a_n_prime, A_n=triple.A_n,
                  sup_lo=bracket.lo, sup_hi=bracket.hi, witness_x=bracket.witness_x,
                  bound_tail=bound_tail, bound_interior=bound_interior, bound_A=bound_A,
                  n_times_sup=n * bracket.hi, holds=holds, converged=bracket.converged)
    return row, assertions


def rate_experiment(kind: Union[str, ConvolutionKind], F: DistributionLike, alpha: float, g: Optional[AuxFn],
                    n_list: Sequence[int], tol: float, max_workers: Optional[int] = None,
                    config_echo: Optional[Dict[str, Any]] = None, grid_points: int = 200) -> RateReport:
    """Measure the distance of normalized powers of F to the limit law of a calculus

    Args:
        kind: Calculus whose powers are measured
        F: Distribution, or an extreme-value family
        alpha: Tail index of F
        g: Auxiliary function of F (default: the Frechet one)
        n_list: Powers to measure
        tol: Width of each certified bracket
        max_workers: Threads used to evaluate rows (default: from ``MAXCONV_THREADS``)
        config_echo: Settings to record in the report
        grid_points: Size of the grid used for the preliminary von Mises check
    Returns:
        (RateReport) Rows sorted by n, with a fitted slope when there are 4 or more rows
    """
    kind = ConvolutionKind(kind)
    F = _as_cdf(F)
    alpha = check_positive(alpha, 'alpha')
    tol = check_positive(tol, 'tol')
    g = g or frechet_aux(alpha)
    ns = sorted({int(n) for n in n_list})
    if not ns:
        raise DomainError('n_list is empty')

    # Membership in the class is a precondition, reported rather than enforced
    von_mises_passed = None
    if F.has_density:
        grid = np.geomspace(g.valid_from * 1.1, g.valid_from * 1e6, grid_points)
        report = verify_von_mises(F, alpha, g, grid, max_workers=1)
        von_mises_passed = report.passed
        if not report.passed:
            logger.warning(f'{F.label} violates |k| <= g at {len(report.violations)} points; bounds may not apply')

    try:
        solver = RhoSolver(alpha, g)
    except SolverError as exc:
        logger.warning(f'Interior bounds unavailable: {exc}')
        solver = None

    limit = limit_law(kind, alpha)
    results = parallel_map(lambda n: _rate_row(F, alpha, g, solver, n, kind, tol, limit), ns, max_workers)
    rows = [r for r, _ in results]
    assertions = [a for _, failed in results for a in failed]

    slope = intercept = residual = None
    fit_excluded = []
    if len(rows) >= 4:
        try:
            fit = fit_rate([(r.n, r.sup_hi) for r in rows], [r.converged for r in rows])
            slope, intercept, residual, fit_excluded = fit.slope, fit.intercept, fit.residual, fit.excluded
        except DomainError as exc:
            logger.info(f'No rate fitted: {exc}')

    n0 = onset([r.n for r in rows], [r.holds for r in rows])
    logger.info(f'{kind.value} rate for {F.label}: slope={slope}, onset={n0}')
    return RateReport(kind=kind, label=F.label, alpha=alpha, tol=tol, rows=rows, slope=slope, intercept=intercept,
                      residual=residual, fit_excluded=fit_excluded, onset_n0=n0, von_mises_passed=von_mises_passed,
                      assertions=assertions, config=dict(config_echo or {}))


def boolean_rate_experiment(F: DistributionLike, alpha: float, g: Optional[AuxFn], n_list: Sequence[int], tol: float,
                            **kwargs) -> RateReport:
    """Distance of F^{boolean n}(a_n x) to the Dagum law, see :func:`rate_experiment`"""
    return rate_experiment(ConvolutionKind.boolean, F, alpha, g, n_list, tol, **kwargs)


def free_rate_experiment(F: DistributionLike, alpha: float, g: Optional[AuxFn], n_list: Sequence[int], tol: float,
                         **kwargs) -> RateReport:
    """Distance of F^{free n}(a_n x) to the free Pareto law, see :func:`rate_experiment`

    For the Frechet law every row must also satisfy sup_hi <= 1/n + tol.
    """
    return rate_experiment(ConvolutionKind.free, F, alpha, g, n_list, tol, **kwargs)


def classical_rate_experiment(F: DistributionLike, alpha: float, g: Optional[AuxFn], n_list: Sequence[int], tol: float,
                              **kwargs) -> RateReport:
    """Distance of F^n(a_n x) to the Frechet law, a baseline for the other two calculi"""
    return rate_experiment(ConvolutionKind.classical, F, alpha, g, n_list, tol, **kwargs)


def _interior_row(F: Cdf, alpha: float, solver: Optional[RhoSolver], n: int, tol: float) -> InteriorRow:
    triple = scaling(F, n)
    powered = power_cdf(scale_cdf(F, triple.a_n_prime), n, ConvolutionKind.boolean)
    limit = limit_law(ConvolutionKind.boolean, alpha)

    mass = min(config.TAIL_MASS, tol / 2)
    x_lo = min(float(powered.quantile(mass)), float(limit.quantile(mass)))
    bracket = sup_distance(powered, limit, min(x_lo, 0.5), 1.0, tol, lower_tail=True)

    rho_a_n, g_rho, bound = interior_bound(solver, triple.a_n)
    return InteriorRow(n=n, a_n=triple.a_n, a_n_prime=triple.a_n_prime, rho_a_n=rho_a_n, g_rho=g_rho,
                       sup_lo=bracket.lo, sup_hi=bracket.hi, witness_x=bracket.witness_x, bound=bound,
                       holds=bracket.converged and bound is not None and bracket.hi <= bound)


def interior_bound_experiment(F: DistributionLike, alpha: float, g: Optional[AuxFn], n_list: Sequence[int], tol: float,
                              max_workers: Optional[int] = None) -> InteriorReport:
    """Compare the sup over (0, 1) of |F^{boolean n}(a_n' x) - Phi^b(x)| with g(rho(a_n)) / (e (alpha - g(rho(a_n))))

    Args:
        F: Distribution, or an extreme-value family
        alpha: Tail index
        g: Auxiliary function (default: the Frechet one)
        n_list: Powers to measure
        tol: Width of each certified bracket
        max_workers: Threads used to evaluate rows
    Returns:
        (InteriorReport) Rows and the onset n0 from which the bound holds
    """
    F = _as_cdf(F)
    alpha = check_positive(alpha, 'alpha')
    g = g or frechet_aux(alpha)
    try:
        solver = RhoSolver(alpha, g)
    except SolverError as exc:
        logger.warning(f'Interior bounds unavailable: {exc}')
        solver = None
    ns = sorted({int(n) for n in n_list})
    rows = parallel_map(lambda n: _interior_row(F, alpha, solver, n, tol), ns, max_workers)
    return InteriorReport(label=F.label, alpha=alpha, tol=tol, rows=rows,
                          onset_n0=onset([r.n for r in rows], [r.holds for r in rows]))


def n_grid(start: float, stop: float, points: int) -> List[int]:
    """Geometrically spaced integers from start to stop, duplicates removed"""
    if not 1 <= start <= stop:
        raise DomainError(f'n range must satisfy 1 <= start <= stop, received {start!r}:{stop!r}')
    if points < 1:
        raise DomainError('n range needs at least one point')
    if points == 1:
        return [int(round(start))]
    return sorted({int(round(v)) for v in np.geomspace(start, stop, points)})
