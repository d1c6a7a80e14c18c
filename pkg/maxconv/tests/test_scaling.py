import math

import numpy as np
from pytest import approx, fixture, mark, raises

from maxconv.distributions import EvDistribution, EvFamily, dagum, frechet, scale_cdf
from maxconv.scaling import (RhoSolver, frechet_g_rho, frechet_rho_asymptotic, frechet_rho_inverse, g_at_rho, rho,
                             rho_inverse, scaling)
from maxconv.vonmises import constant_aux, frechet_aux
from maxconv.utils.validation import DomainError, SolverError


@fixture
def solver():
    return RhoSolver(1, frechet_aux(1))


def test_frechet_scaling():
    triple = scaling(frechet(1), 10)
    assert triple.n == 10
    assert triple.a_n == approx(10)
    assert triple.a_n_prime == approx(1 / math.log(1.1))
    assert triple.A_n == approx(10 * math.log(1.1))

    triple = scaling(frechet(2), 100)
    assert triple.a_n == approx(10)
    assert triple.A_n == approx(triple.a_n / triple.a_n_prime)


@mark.parametrize('n', [1, 10, 1000, 10 ** 6])
def test_generic_matches_closed_form(n):
    # The scaled wrapper hides the family, forcing the quantile path
    generic = scaling(scale_cdf(frechet(2), 1), n)
    closed = scaling(frechet(2), n)
    assert generic.a_n == approx(closed.a_n, rel=1e-10)
    assert generic.a_n_prime == approx(closed.a_n_prime, rel=1e-10)
    assert generic.A_n == approx(closed.A_n, rel=1e-10)


def test_dagum_scaling():
    for n in (1, 5, 1000):
        triple = scaling(dagum(2), n)
        assert triple.a_n_prime == approx(math.sqrt(n), rel=1e-12)
        assert triple.a_n == approx(math.expm1(1 / n) ** -0.5, rel=1e-10)
        assert triple.A_n < 1


def test_scaling_domain():
    with raises(DomainError):
        scaling(frechet(1), 0)
    with raises(DomainError):
        scaling(frechet(1), 2.5)

    # The Weibull law lives on (-inf, 0)
    with raises(DomainError):
        scaling(EvDistribution(EvFamily.from_name('weibull', 1)), 10)


def test_t_min(solver):
    # g(t) = 1/(t-1) crosses e/(e+1) at t = 2 + 1/e
    assert solver.t_min == approx(2 + 1 / math.e, rel=1e-9)
    assert solver.g(solver.t_min) < math.e / (math.e + 1)
    assert 'RhoSolver' in repr(solver)

    # When g already starts below the threshold, the search stops at valid_from
    early = RhoSolver(1, constant_aux(0.1, valid_from=3))
    assert early.t_min == 3


def test_rho_inverse_matches_closed_form(solver):
    t = np.array([3., 10., 100., 1e4])
    assert np.allclose(rho_inverse(solver, t), frechet_rho_inverse(1, t), rtol=1e-12)

    solver2 = RhoSolver(2, frechet_aux(2))
    assert np.allclose(solver2.rho_inverse(t), frechet_rho_inverse(2, t), rtol=1e-12)

    with raises(DomainError):
        solver.rho_inverse(solver.t_min)
    with raises(DomainError):
        frechet_rho_inverse(1, 2)


def test_rho_round_trip(solver):
    for t in (2.5, 3., 10., 1e3, 1e6):
        assert rho(solver, float(solver.rho_inverse(t))) == approx(t, rel=1e-9)

    for x in (1., 10., 1e4, 1e10):
        t = solver.rho(x)
        assert solver.rho_inverse(t) == approx(x, rel=1e-9)


def test_rho_domain(solver):
    assert solver.x_min > 0
    with raises(DomainError):
        solver.rho(solver.x_min / 10)
    with raises(DomainError):
        solver.rho(-1)
    assert g_at_rho(solver, solver.x_min / 10) is None


def test_rho_asymptotics(solver):
    for alpha in (1, 2):
        s = RhoSolver(alpha, frechet_aux(alpha))
        x = 1e12
        assert s.rho(x) == approx(frechet_rho_asymptotic(alpha, x), rel=1e-3)

    n = 1e10
    assert g_at_rho(solver, n) == approx(frechet_g_rho(1, n), rel=1e-3)


def test_rho_needs_decaying_g():
    with raises(SolverError):
        RhoSolver(1, constant_aux(1))


@mark.parametrize('alpha', [1, 2])
def test_rho_inverse_dense(alpha):
    s = RhoSolver(alpha, frechet_aux(alpha))
    t = np.geomspace(3, 1e6, 100)
    assert np.allclose(s.rho_inverse(t), frechet_rho_inverse(alpha, t), rtol=1e-12, atol=0)


def test_rho_inverse_growth(solver):
    t = 1e6
    assert 0.99 <= solver.rho_inverse(t) / (math.e * t ** 2) <= 1.01


@mark.parametrize('alpha', [0.5, 1, 2])
def test_rescaling_constant_expansion(alpha):
    for n in [10, 30, 100, 1000, 10 ** 4, 10 ** 6]:
        A_n = scaling(frechet(alpha), n).A_n
        assert abs(A_n - (1 - 1 / (2 * alpha * n))) <= 3 / n ** 2
