"""Pointwise and sup-norm checks of the inequalities behind the Boolean rate

Each check returns a :class:`~maxconv.models.reports.CheckReport`. Points where an
inequality is not asserted (inadmissible arguments) are counted as skipped.
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from maxconv import config
from maxconv.distributions import Cdf, dagum
from maxconv.models.reports import CheckPoint, CheckReport
from maxconv.ratelab.sup import sup_distance
from maxconv.scaling import scaling
from maxconv.semigroup import (boolean_combine, boolean_power_point, classical_power_point, free_power_point,
                               power_cdf, x_inv, x_map)
from maxconv.utils.validation import DomainError, check_positive
from maxconv.vonmises import AuxFn

logger = logging.getLogger(__name__)

# Most failing points kept in a report
_MAX_FAILURES = 50


def _dagum_cdf(alpha: np.ndarray, x: np.ndarray) -> np.ndarray:
    """1 / (1 + x^-alpha) for x > 0 with a pointwise index"""
    return expit(alpha * np.log(x))


def _failures(x, lhs, rhs, n: Optional[int] = None) -> List[CheckPoint]:
    slack = rhs - lhs
    bad = np.flatnonzero(slack < -config.SANDWICH_SLACK)[:_MAX_FAILURES]
    return [CheckPoint(x=float(x[i]), lhs=float(lhs[i]), rhs=float(rhs[i]), slack=float(slack[i]), n=n) for i in bad]


def check_sandwich(F: Cdf, alpha: float, g: AuxFn, n: int, x_grid: Sequence[float]) -> CheckReport:
    """Check Phi^b_{alpha + g(a_n' x)}(x) <= F^{boolean n}(a_n' x) <= Phi^b_{alpha - g(a_n' x)}(x)

    Only points x in (0, 1) with ``a_n' x >= g.valid_from`` and ``g(a_n' x) < alpha`` are checked.

    Args:
        F: Distribution function
        alpha: Tail index
        g: Auxiliary function of F
        n: Power
        x_grid: Points in (0, 1)
    Returns:
        (CheckReport) Verdict with the number of skipped points
    """
    alpha = check_positive(alpha, 'alpha')
    x = np.asarray(x_grid, dtype=float).ravel()
    a_n_prime = scaling(F, n).a_n_prime
    y = a_n_prime * x

    in_range = (x > 0) & (x < 1) & (y >= g.valid_from)
    gy = np.full_like(x, np.inf)
    gy[in_range] = g(y[in_range])
    admissible = in_range & (gy < alpha)
    x, y, gy = x[admissible], y[admissible], gy[admissible]

    lower = _dagum_cdf(alpha + gy, x)
    middle = np.asarray(power_cdf(F, n, 'boolean').cdf(y), dtype=float)
    upper = _dagum_cdf(alpha - gy, x)

    failures = _failures(x, lower, middle, n) + _failures(x, middle, upper, n)
    worst = float(min((middle - lower).min(), (upper - middle).min())) if x.size else None
    skipped = int((~admissible).sum())
    if skipped:
        logger.info(f'Sandwich check skipped {skipped} inadmissible points at n={n}')
    return CheckReport(suite='sandwich', passed=not failures, checked=int(x.size), skipped=skipped,
                       worst_slack=worst, failures=failures,
                       parameters={'distribution': F.label, 'alpha': alpha, 'n': int(n), 'g': g.label, 'a_n_prime': a_n_prime})


def dagum_lipschitz_bound(alpha1: float, alpha2: float) -> float:
    """e^-1 |alpha2 - alpha1| / min(alpha1, alpha2)"""
    return abs(alpha2 - alpha1) / (math.e * min(alpha1, alpha2))


def check_dagum_lipschitz(alpha1: float, alpha2: float, tol: float = 1e-8) -> CheckReport:
    """Compare the certified sup over (0, 1) of |Phi^b_alpha1 - Phi^b_alpha2| with its Lipschitz bound

    Args:
        alpha1, alpha2: Positive tail indices
        tol: Width of the certified bracket
    Returns:
        (CheckReport) ``measured`` is the upper end of the bracket
    """
    alpha1 = check_positive(alpha1, 'alpha1')
    alpha2 = check_positive(alpha2, 'alpha2')
    bound = dagum_lipschitz_bound(alpha1, alpha2)
    F, G = dagum(alpha1), dagum(alpha2)

    mass = tol / 2
    x_lo = min(float(F.quantile(mass)), float(G.quantile(mass)))
    bracket = sup_distance(F, G, x_lo, 1.0, tol, lower_tail=True)
    passed = bracket.hi <= bound + tol
    return CheckReport(suite='dagum-lipschitz', passed=passed, checked=1, measured=bracket.hi, bound=bound,
                       worst_slack=bound - bracket.hi,
                       parameters={'alpha1': alpha1, 'alpha2': alpha2, 'tol': tol, 'sup_lo': bracket.lo,
                                   'witness_x': bracket.witness_x, 'converged': bracket.converged})


def check_tail_chain(F: Cdf, alpha: float, n: int, x_grid: Sequence[float]) -> CheckReport:
    """Check |F^{boolean n}(a_n x) - Phi^b(x)| <= |x^-alpha - n (1 - F(a_n x))| + x^-alpha (1 - F(a_n x)) for x >= 1

    Where n F(a_n x) >= n - 1 the first term on the right is the free distance
    |F^{free n}(a_n x) - Phi^free(x)|.
    """
    alpha = check_positive(alpha, 'alpha')
    x = np.asarray(x_grid, dtype=float).ravel()
    admissible = x >= 1
    x = x[admissible]
    a_n = scaling(F, n).a_n
    y = a_n * x

    s = np.asarray(F.sf(y), dtype=float)
    z = np.power(x, -alpha)
    lhs = np.abs(np.asarray(power_cdf(F, n, 'boolean').cdf(y), dtype=float) - 1 / (1 + z))
    rhs = np.abs(z - n * s) + z * s

    failures = _failures(x, lhs, rhs, n)
    return CheckReport(suite='tail-chain', passed=not failures, checked=int(x.size), skipped=int((~admissible).sum()),
                       worst_slack=float((rhs - lhs).min()) if x.size else None, failures=failures,
                       parameters={'distribution': F.label, 'alpha': alpha, 'n': int(n), 'a_n': a_n})


def check_rescaling(alpha: float, A_n: float, x_grid: Sequence[float]) -> CheckReport:
    """Check |Phi^b(A_n x) - Phi^b(x)| <= alpha (1 / A_n - 1) on (0, 1)"""
    alpha = check_positive(alpha, 'alpha')
    if not 0 < A_n <= 1:
        raise DomainError(f'A_n must lie in (0, 1], received {A_n!r}')
    x = np.asarray(x_grid, dtype=float).ravel()
    admissible = (x > 0) & (x < 1)
    x = x[admissible]

    lhs = np.abs(_dagum_cdf(alpha, A_n * x) - _dagum_cdf(alpha, x))
    bound = alpha * (1 / A_n - 1)
    rhs = np.full_like(lhs, bound)
    failures = _failures(x, lhs, rhs)
    return CheckReport(suite='rescaling', passed=not failures, checked=int(x.size), skipped=int((~admissible).sum()),
                       worst_slack=float((rhs - lhs).min()) if x.size else None, measured=float(lhs.max()) if x.size else None,
                       bound=bound, failures=failures, parameters={'alpha': alpha, 'A_n': A_n})


def check_algebra(samples: int = 10000, seed: int = 0, tol: float = 1e-12) -> CheckReport:
    """Check the algebraic laws of the Boolean semigroup on random samples

    Covers the homomorphism X(u * v) = X(u) X(v), both inverse round trips, the identity
    u^{boolean n} = X<-1>(X(u)^n), power composition and the ordering of the three powers.

    Args:
        samples: Number of random points per law
        seed: Seed of the random generator
        tol: Largest accepted absolute error
    Returns:
        (CheckReport) ``measured`` is the largest error over all laws
    """
    rng = np.random.default_rng(seed)
    u, v = rng.uniform(0, 1, samples), rng.uniform(0, 1, samples)

    # X(u) underflows to 0 for u below about 1/745, where X<-1>(X(u)) = u cannot be recovered
    visible = u[u > 1 / 700]
    errors = {
        'homomorphism': np.abs(x_map(boolean_combine(u, v)) - x_map(u) * x_map(v)),
        'inverse_left': np.abs(x_inv(x_map(visible)) - visible),
        'inverse_right': np.abs(x_map(x_inv(u)) - u),
    }

    # Keep n (1 - u) / u moderate so X(u)^n does not underflow
    w = rng.uniform(0.05, 1, samples)
    for m, k in [(2, 3), (5, 7), (10, 10)]:
        errors[f'power_{m}x{k}'] = np.abs(boolean_power_point(boolean_power_point(w, m), k) - boolean_power_point(w, m * k))
    for n in [2, 5, 20]:
        errors[f'conjugation_{n}'] = np.abs(x_inv(np.power(x_map(w), n)) - boolean_power_point(w, n))

    ordering = 0.
    for n in [1, 1.5, 2, 10, 1000]:
        f, c, b = free_power_point(u, n), classical_power_point(u, n), boolean_power_point(u, n)
        ordering = max(ordering, float(np.max(f - c)), float(np.max(c - b)))
    errors['ordering'] = np.array([max(ordering, 0.)])

    worst = {name: float(np.max(e)) for name, e in errors.items()}
    measured = max(worst.values())
    failed = [name for name, e in worst.items() if e > tol]
    if failed:
        logger.warning(f'Algebraic laws exceeding {tol:g}: {", ".join(failed)}')
    return CheckReport(suite='homomorphism', passed=not failed, checked=samples, measured=measured, bound=tol,
                       worst_slack=tol - measured, parameters={'seed': seed, 'errors': worst, 'failed': failed})
