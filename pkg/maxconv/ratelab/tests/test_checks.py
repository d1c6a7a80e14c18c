import itertools
import math

import numpy as np
from pytest import approx, mark, raises

from maxconv.distributions import dagum, frechet
from maxconv.ratelab.checks import (check_algebra, check_dagum_lipschitz, check_rescaling, check_sandwich,
                                    check_tail_chain, dagum_lipschitz_bound)
from maxconv.scaling import scaling
from maxconv.utils.validation import DomainError
from maxconv.vonmises import frechet_aux


@mark.parametrize('alpha', [1, 2])
@mark.parametrize('n', [10 ** 3, 10 ** 4, 10 ** 5])
def test_sandwich_frechet(alpha, n):
    x = np.linspace(0.05, 0.99, 50)
    report = check_sandwich(frechet(alpha), alpha, frechet_aux(alpha), n, x)
    assert report.passed
    assert report.checked == 50
    assert report.skipped == 0
    assert report.worst_slack >= -1e-12
    assert report.parameters['a_n_prime'] == approx(scaling(frechet(alpha), n).a_n_prime)


def test_sandwich_skips_inadmissible_points():
    # a_n' = 100 for the Dagum law with alpha=2 and n=10^4, so 0.01 maps below g.valid_from
    report = check_sandwich(dagum(2), 2, frechet_aux(2), 10 ** 4, [0.01, 0.5, 0.99, 1.5])
    assert report.passed
    assert report.checked == 2
    assert report.skipped == 2
    assert report.failures == []


def test_dagum_lipschitz_example():
    assert dagum_lipschitz_bound(2, 2.1) == approx(0.0183940, abs=1e-7)
    report = check_dagum_lipschitz(2, 2.1)
    assert report.passed
    assert report.measured <= report.bound
    assert report.parameters['converged']


def test_dagum_lipschitz_grid():
    alphas = [0.5, 1.0, 2.0, 3.0, 4.0]
    x = np.geomspace(1e-12, 1, 10 ** 6)
    for a1, a2 in itertools.product(alphas, alphas):
        report = check_dagum_lipschitz(a1, a2)
        assert report.passed
        assert report.measured <= report.bound + 1e-8

        oracle = float(np.max(np.abs(dagum(a1).cdf(x) - dagum(a2).cdf(x))))
        assert report.measured == approx(oracle, abs=1e-6)

    with raises(DomainError):
        check_dagum_lipschitz(0, 1)


@mark.parametrize('n', [1, 10, 1000, 10 ** 5])
def test_tail_chain(n):
    x = np.concatenate([[0.5], np.geomspace(1, 1e4, 100)])
    report = check_tail_chain(frechet(1), 1, n, x)
    assert report.passed
    assert report.checked == 100
    assert report.skipped == 1
    assert report.worst_slack >= -1e-12


def test_tail_chain_endpoint():
    # At x = 1 both sides are bounded by (1 - e^-1/n) + |n e^-1/n - n + 1|
    for n in (1, 10, 100):
        report = check_tail_chain(frechet(1), 1, n, [1.0])
        point_bound = -math.expm1(-1 / n) + abs(n * math.exp(-1 / n) - n + 1)
        assert report.passed
        assert report.worst_slack <= point_bound


@mark.parametrize('alpha', [0.5, 1, 2])
def test_rescaling(alpha):
    x = np.linspace(0.001, 0.999, 500)
    for n in (1, 10, 1000):
        A_n = scaling(frechet(alpha), n).A_n
        report = check_rescaling(alpha, A_n, x)
        assert report.passed
        assert report.measured <= report.bound

    with raises(DomainError):
        check_rescaling(1, 1.5, x)


def test_algebra():
    report = check_algebra()
    assert report.passed, report.parameters['failed']
    assert report.checked == 10000
    assert report.measured <= 1e-12
    assert 'conjugation_20' in report.parameters['errors']

    # An impossible tolerance fails at least the homomorphism law
    strict = check_algebra(samples=1000, tol=1e-300)
    assert not strict.passed
    assert 'homomorphism' in strict.parameters['failed']
