import math

import mpmath
import numpy as np
from pytest import approx, fixture, mark, raises

from maxconv.distributions import GridCdf, dagum, frechet, pareto
from maxconv.semigroup import (PoweredCdf, boolean_combine, boolean_power_point, classical_power_point,
                               free_power_point, power_cdf, power_point, x_inv, x_inverse_transform, x_map,
                               x_transform)
from maxconv.utils.validation import DomainError, MissingDensityError


@fixture
def rng():
    return np.random.default_rng(1)


def test_point_examples():
    assert boolean_combine(0.5, 0.5) == approx(1 / 3, rel=1e-15)
    assert boolean_combine(0.3, 1) == approx(0.3, rel=1e-15)
    assert boolean_combine(0, 0.7) == 0
    assert free_power_point(0.9, 3) == approx(0.7, rel=1e-14)
    assert free_power_point(0.5, 3) == 0
    assert classical_power_point(0.5, 2) == approx(0.25)
    assert boolean_power_point(0.5, 2) == approx(1 / 3)
    assert x_map(0.5) == approx(math.exp(-1), rel=1e-15)
    assert x_map(0) == 0
    assert x_map(1) == 1
    assert x_inv(math.exp(-1)) == approx(0.5, rel=1e-15)
    assert x_inv(0) == 0


def test_point_domain():
    with raises(DomainError):
        boolean_combine(1.2, 0.5)
    with raises(DomainError):
        boolean_power_point(0.5, 0.5)
    with raises(DomainError):
        x_map(-0.1)
    with raises(DomainError):
        power_point(0.5, math.inf, 'free')
    with raises(DomainError):
        x_inv(math.nan)


def test_arrays_keep_shape():
    u = np.linspace(0, 1, 11)
    assert boolean_combine(u, 0.5).shape == (11,)
    assert boolean_combine(0.5, u).shape == (11,)
    assert power_point(u.reshape(1, -1), 3, 'boolean').shape == (1, 11)
    assert isinstance(x_map(0.25), float)


def test_homomorphism(rng):
    u = rng.uniform(0, 1, 10000)
    v = rng.uniform(0, 1, 10000)
    assert np.max(np.abs(x_map(boolean_combine(u, v)) - x_map(u) * x_map(v))) <= 1e-12


def test_inverse_round_trips(rng):
    u = rng.uniform(1 / 700, 1, 10000)
    assert np.max(np.abs(x_inv(x_map(u)) - u)) <= 1e-12
    assert np.max(np.abs(x_map(x_inv(u)) - u)) <= 1e-12


def test_boolean_matches_mpmath():
    mpmath.mp.dps = 50
    for u, n in [(0.3, 2), (0.999, 10), (1 - 1e-9, 1000), (0.01, 7.5)]:
        U = mpmath.mpf(u)
        expected = U / (n - (n - 1) * U)
        assert boolean_power_point(u, n) == approx(float(expected), rel=1e-13)


@mark.parametrize('kind', ['classical', 'free', 'boolean'])
def test_power_composition(kind):
    w = np.linspace(0.05, 1, 200)
    for m, n in [(2, 3), (5, 7), (10, 10)]:
        composed = power_point(power_point(w, m, kind), n, kind)
        assert np.allclose(composed, power_point(w, m * n, kind), atol=1e-12, rtol=0)
    # 1 - (1 - w) may differ from w in the last bit
    assert np.allclose(power_point(w, 1, kind), w, rtol=0, atol=1e-15)


def test_conjugation(rng):
    # F(x) >= 0.05 keeps n(1-u)/u well inside the range where exp does not underflow
    u = rng.uniform(0.05, 1, 10000)
    for n in (2, 5, 20):
        lhs = x_inv(x_map(u) ** n)
        assert np.max(np.abs(lhs - boolean_power_point(u, n))) <= 1e-12


def test_ordering():
    u = np.linspace(0, 1, 1001)
    for n in (1, 1.5, 2, 10, 1000):
        free = free_power_point(u, n)
        boolean = boolean_power_point(u, n)
        classical = classical_power_point(u, n)
        assert np.all(free <= boolean + 1e-15)
        assert np.all(classical <= boolean + 1e-15)
        assert np.all(free <= classical + 1e-15)


def test_monotonicity():
    u = np.linspace(0, 1, 501)
    for kind in ('classical', 'free', 'boolean'):
        previous = u
        for n in (1, 2, 3.5, 10, 100):
            current = power_point(u, n, kind)
            assert np.all(np.diff(current) >= 0)
            assert np.all(current <= previous + 1e-15)
            previous = current


def test_power_cdf_example():
    G = power_cdf(frechet(1), 10, 'boolean')
    assert isinstance(G, PoweredCdf)
    assert G.cdf(10) == approx(1 / (1 + 10 * math.expm1(0.1)), rel=1e-14)
    assert G.sf(10) == approx(10 * math.expm1(0.1) / (1 + 10 * math.expm1(0.1)), rel=1e-13)


def test_power_one_is_identity():
    x = np.geomspace(0.5, 100, 50)
    for kind in ('classical', 'free', 'boolean'):
        G = power_cdf(frechet(2), 1, kind)
        assert np.allclose(G.cdf(x), frechet(2).cdf(x), rtol=1e-13)


def test_stability():
    # Fréchet alpha=1 powered into Fréchet with scale n
    x = np.geomspace(0.1, 1e6, 40)
    G = power_cdf(frechet(1), 50, 'classical')
    assert np.allclose(G.cdf(50 * x), frechet(1).cdf(x), rtol=1e-12)
    assert np.allclose(G.sf(50 * x), frechet(1).sf(x), rtol=1e-10)

    # Dagum is stable for the Boolean calculus
    G = power_cdf(dagum(2), 9, 'boolean')
    assert np.allclose(G.cdf(3 * x), dagum(2).cdf(x), rtol=1e-12)

    # Pareto is stable for the free calculus
    G = power_cdf(pareto(1), 4, 'free')
    assert np.allclose(G.cdf(4 * x[x >= 1]), pareto(1).cdf(x[x >= 1]), rtol=1e-12, atol=1e-15)
    assert G.support_lo == approx(4)


def test_powered_tail_precision():
    mpmath.mp.dps = 50
    x = 1e9
    G = power_cdf(frechet(1), 10, 'boolean')
    s = -mpmath.expm1(-1 / mpmath.mpf(x))
    expected = 10 * s / (1 + 9 * s)
    assert G.sf(x) == approx(float(expected), rel=1e-13)


@mark.parametrize('kind', ['classical', 'free', 'boolean'])
def test_powered_quantile(kind):
    G = power_cdf(frechet(1.5), 7, kind)
    p = np.linspace(0.02, 0.98, 49)
    assert np.allclose(G.cdf(G.quantile(p)), p, rtol=1e-10)
    s = np.geomspace(1e-10, 0.5, 30)
    assert np.allclose(G.sf(G.isf(s)), s, rtol=1e-8)


def test_powered_density():
    x = np.array([0.5, 1, 2, 10])
    h = 1e-6 * x
    for kind in ('classical', 'boolean'):
        G = power_cdf(frechet(1), 5, kind)
        numeric = (G.cdf(x + h) - G.cdf(x - h)) / (2 * h)
        assert np.allclose(G.pdf(x), numeric, rtol=1e-6)

    free = power_cdf(frechet(1), 5, 'free')
    assert not free.has_density
    with raises(MissingDensityError):
        free.pdf(1)


def test_x_transform():
    F = dagum(1)
    x = np.geomspace(0.01, 100, 40)
    T = x_transform(F)
    assert np.allclose(T.cdf(x), frechet(1).cdf(x), rtol=1e-12)
    assert np.allclose(T.sf(x), frechet(1).sf(x), rtol=1e-10)
    assert np.allclose(T.pdf(x), frechet(1).pdf(x), rtol=1e-10)

    p = np.linspace(0.01, 0.99, 50)
    assert np.allclose(T.cdf(T.quantile(p)), p, rtol=1e-10)

    back = x_inverse_transform(T)
    assert np.allclose(back.cdf(x), F.cdf(x), rtol=1e-12)
    assert np.allclose(back.sf(x), F.sf(x), rtol=1e-10)

    U = x_inverse_transform(frechet(1))
    assert np.allclose(U.cdf(x), F.cdf(x), rtol=1e-12)
    assert np.allclose(U.quantile(p), F.quantile(p), rtol=1e-10)
    assert np.allclose(U.pdf(x), F.pdf(x), rtol=1e-10)


def test_x_inverse_transform_low_levels():
    # The base level exp(-(1-y)/y) is far below the resolution of 1 - s at these levels
    mpmath.mp.dps = 30
    U = x_inverse_transform(frechet(1))
    for y in (0.005, 0.01, 0.03, 0.2):
        level = mpmath.exp(-(1 - mpmath.mpf(y)) / y)
        expected = 1 / -mpmath.log(level)
        assert U.quantile(y) == approx(float(expected), rel=1e-12)
    assert U.quantile(0.01) == approx(0.01 / 0.99, rel=1e-12)
    assert U.quantile(0) == 0
    assert U.isf(0) == math.inf

    # isf near 1 takes the same route as quantile near 0
    assert U.isf(0.99) == approx(0.01 / 0.99, rel=1e-12)
    assert U.isf(1e-3) == approx(0.999 / 1e-3, rel=1e-9)


@mark.parametrize('kind', ['classical', 'free', 'boolean'])
@mark.parametrize('n', [1, 7, 1000])
def test_powered_pdf_bounds(kind, n):
    G = power_cdf(frechet(1.5), n, kind)
    edges = np.geomspace(0.05, 50, 41) * n ** (1 / 1.5)
    lo, hi = G.pdf_bounds(edges[:-1], edges[1:])
    for left, right, low, high in zip(edges[:-1], edges[1:], lo, hi):
        x = np.linspace(left, right, 501)[1:-1]
        # Slopes of the CDF between neighbors bracket the density in the free case too
        slope = np.diff(G.cdf(x)) / np.diff(x)
        assert np.all(low * (1 - 1e-9) - 1e-300 <= slope)
        assert np.all(slope <= high * (1 + 1e-9) + 1e-300)


def test_powered_pdf_bounds_need_a_base_enclosure():
    G = power_cdf(GridCdf([0., 1.], [0.5, 1.]), 3, 'boolean')
    assert G.pdf_bounds(np.array([0.]), np.array([1.])) is None


def test_powered_breakpoints():
    # Only the free power adds its kink to the base breakpoints
    assert power_cdf(pareto(2), 5, 'classical').breakpoints() == (1.,)
    free = power_cdf(frechet(1), 10, 'free')
    assert free.breakpoints() == (free.support_lo,)
    assert free.cdf(free.support_lo) == approx(0, abs=1e-12)
    assert power_cdf(GridCdf([0., 1.], [0.5, 1.]), 3, 'boolean').breakpoints() == ()
