import math

import numpy as np
from pytest import approx, mark, raises

from maxconv import config
from maxconv.distributions import EvDistribution, EvFamily, GridCdf, dagum, frechet, pareto, scale_cdf
from maxconv.ratelab.sup import sup_distance, sup_distance_full_line, tail_window
from maxconv.scaling import scaling
from maxconv.semigroup import power_cdf
from maxconv.utils.validation import DomainError


def _boolean_oracle(n: int) -> float:
    """Dense-grid maximum of 1/(1+u) - 1/(1+v), v = n (e^(u/n) - 1), over u = x^-alpha"""
    u = np.geomspace(1, 100 * n, 2 * 10 ** 6)
    w = u / n
    v_minus_u = n * (np.expm1(w) - w)
    return float(np.max(v_minus_u / ((1 + u) * (1 + u + v_minus_u))))


def test_identical_laws():
    F = frechet(1)
    bracket = sup_distance(F, F, 0.1, 10, 1e-9)
    assert bracket.lo == bracket.hi == 0
    assert bracket.converged
    assert sup_distance_full_line(dagum(2), dagum(2), 1e-9).hi == 0


def test_window_validation():
    with raises(DomainError):
        sup_distance(frechet(1), dagum(1), 2, 1, 1e-6)
    with raises(DomainError):
        sup_distance(frechet(1), dagum(1), 0, math.inf, 1e-6)
    with raises(DomainError):
        sup_distance(frechet(1), dagum(1), 1, 2, 0)


def test_dagum_pair():
    F, G = dagum(1), dagum(2)
    bracket = sup_distance(F, G, 1e-6, 1e6, 1e-6)
    x = np.geomspace(1e-6, 1e6, 10 ** 6)
    oracle = float(np.max(np.abs(F.cdf(x) - G.cdf(x))))
    assert bracket.converged
    assert bracket.lo - 1e-9 <= oracle <= bracket.hi
    assert bracket.hi - bracket.lo <= 1e-6
    assert bracket.hi < math.exp(-1)
    assert abs(F.cdf(bracket.witness_x) - G.cdf(bracket.witness_x)) == approx(bracket.lo)


def test_dagum_frechet_full_line():
    bracket = sup_distance_full_line(dagum(1), frechet(1), 1e-10)
    assert bracket.converged
    assert bracket.tail_bound <= 5e-11 * (1 + 1e-9)

    # The maximum of 1/(1+z) - e^-z sits where (1+z)^2 e^-z = 1
    z = 2.5129
    for _ in range(50):
        z -= ((1 + z) ** 2 * math.exp(-z) - 1) / ((1 + z) * (1 - z) * math.exp(-z))
    expected = 1 / (1 + z) - math.exp(-z)
    assert bracket.lo <= expected + 1e-15
    assert expected <= bracket.hi
    assert bracket.witness_x == approx(1 / z, rel=1e-3)


def test_step_function():
    F = GridCdf([0., 1.], [0.5, 1.])
    G = EvDistribution(EvFamily.from_name('exponential'))
    bracket = sup_distance(F, G, -1, 2, 1e-6, lower_tail=True, upper_tail=True)
    assert bracket.hi == approx(0.5, abs=1e-12)
    assert bracket.lo >= 0.5 - 1e-6
    assert bracket.witness_x == approx(0, abs=1e-5)


def test_tail_closure_counts():
    F, G = frechet(1), dagum(1)

    # A window that misses most of the mass cannot certify a small sup
    bracket = sup_distance(F, G, 0.5, 2, 1e-8, lower_tail=True, upper_tail=True)
    assert bracket.tail_bound == approx(max(F.sf(2), G.sf(2), F.cdf(0.5), G.cdf(0.5)))
    assert bracket.hi >= bracket.tail_bound
    assert not bracket.converged

    x_lo, x_hi = tail_window(F, G, 1e-8)
    assert max(F.cdf(x_lo), G.cdf(x_lo)) <= 1e-8 * (1 + 1e-12)
    assert max(F.sf(x_hi), G.sf(x_hi)) <= 1e-8 * (1 + 1e-12)


def test_budget_exhaustion():
    bracket = sup_distance(dagum(1), frechet(1), 1e-3, 1e3, 1e-14, initial_cells=64, cell_budget=200)
    assert not bracket.converged
    assert bracket.cells_used <= 200
    assert bracket.lo <= bracket.hi


def test_random_pairs_are_sound():
    rng = np.random.default_rng(7)
    x = np.geomspace(1e-6, 1e6, 10 ** 5)
    for _ in range(100):
        F = scale_cdf(frechet(rng.uniform(0.5, 3)), rng.uniform(0.2, 5))
        G = scale_cdf(dagum(rng.uniform(0.5, 3)), rng.uniform(0.2, 5))
        bracket = sup_distance_full_line(F, G, 1e-5)
        oracle = float(np.max(np.abs(F.cdf(x) - G.cdf(x))))
        assert oracle <= bracket.hi
        assert bracket.lo <= bracket.hi
        assert bracket.hi - bracket.lo <= 1e-5


def test_boolean_frechet_at_ten_thousand():
    n = 10 ** 4
    F = frechet(1)
    powered = power_cdf(scale_cdf(F, scaling(F, n).a_n), n, 'boolean')
    bracket = sup_distance_full_line(powered, dagum(1), 1e-8)
    assert 0.49 <= n * bracket.lo <= n * bracket.hi <= 0.51

    # No mass below zero on either side
    assert powered.cdf(0) == dagum(1).cdf(0) == 0


@mark.parametrize('alpha', [0.5, 1, 2])
def test_boolean_sharpness(alpha):
    n = 10 ** 6
    F = frechet(alpha)
    powered = power_cdf(scale_cdf(F, scaling(F, n).a_n), n, 'boolean')
    bracket = sup_distance_full_line(powered, dagum(alpha), 8e-10)
    assert bracket.converged
    assert 0.48 <= n * bracket.hi <= 0.52

    # The substitution u = x^-alpha removes alpha from the distance
    oracle = _boolean_oracle(n)
    assert 0.5 * (bracket.lo + bracket.hi) == approx(oracle, rel=1e-3)


def _boolean_pair(alpha: float, n: int):
    F = frechet(alpha)
    return power_cdf(scale_cdf(F, scaling(F, n).a_n), n, 'boolean'), dagum(alpha)


def test_boolean_frechet_at_one_million():
    n = 10 ** 6
    powered, limit = _boolean_pair(1, n)
    bracket = sup_distance_full_line(powered, limit, 1e-8)
    assert bracket.converged
    assert bracket.cells_used < config.CELL_BUDGET // 10
    assert 0.48 <= n * bracket.lo <= n * bracket.hi <= 0.52


def test_density_enclosures_shrink_the_subdivision():
    powered, limit = _boolean_pair(1, 10 ** 4)
    x_lo, x_hi = tail_window(powered, limit, 5e-10)
    tight = sup_distance(powered, limit, x_lo, x_hi, 1e-9, cell_budget=10 ** 5)
    loose = sup_distance(powered, limit, x_lo, x_hi, 1e-9, cell_budget=10 ** 5, use_density=False)

    # The monotone bound alone needs far more cells near the broad maximum
    assert tight.converged
    assert not loose.converged
    assert tight.cells_used < loose.cells_used
    assert loose.lo <= tight.hi
    assert tight.lo <= loose.hi


def test_kinked_pair_seeds_the_breakpoints():
    # The free power has a kink and the Pareto density jumps at 1, where the distance peaks
    n = 100
    F = frechet(1)
    powered = power_cdf(scale_cdf(F, scaling(F, n).a_n), n, 'free')
    bracket = sup_distance_full_line(powered, pareto(1), 1e-9)
    assert bracket.converged
    assert bracket.hi == approx(1 + n * math.expm1(-1 / n), abs=2e-9)
    assert bracket.witness_x == approx(1., rel=1e-9)

    # Density enclosures on either side of the jump still pay off
    x_lo, x_hi = tail_window(powered, pareto(1), 5e-10)
    tight = sup_distance(powered, pareto(1), x_lo, x_hi, 1e-9)
    loose = sup_distance(powered, pareto(1), x_lo, x_hi, 1e-9, use_density=False)
    assert tight.converged and loose.converged
    assert tight.cells_used < loose.cells_used
