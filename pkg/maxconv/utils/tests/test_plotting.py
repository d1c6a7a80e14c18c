import math

import numpy as np
from pytest import approx, fixture, raises

from maxconv.models.reports import RateReport, RateRow
from maxconv.utils.plotting import reference_curve, render_rate_svg


def _report(kind: str, sups) -> RateReport:
    rows = [RateRow(n=n, a_n=n, a_n_prime=n, A_n=1, sup_lo=s, sup_hi=s, bound_A=0, n_times_sup=n * s, holds=True)
            for n, s in zip([10, 100, 1000], sups)]
    return RateReport(kind=kind, label='frechet(alpha=1)', alpha=1, tol=1e-8, rows=rows, onset_n0=10)


@fixture
def report() -> RateReport:
    return _report('boolean', [0.05, 0.005, 0.0005])


def test_reference_curve(report):
    ns = np.array([1., 100.])
    assert reference_curve(report, ns) == approx([math.exp(0.5), math.exp(0.5) / 10])
    assert reference_curve(_report('free', [1, 1, 1]), ns) == approx([1, 0.01])


def test_render_svg(report, tmp_path):
    first = render_rate_svg(report, tmp_path / 'a.svg')
    second = render_rate_svg(report, tmp_path / 'b.svg')
    text = first.read_text()
    assert text.startswith('<?xml')
    assert '<svg' in text
    assert first.read_bytes() == second.read_bytes()


def test_render_needs_positive_rows(tmp_path):
    with raises(ValueError, match='positive'):
        render_rate_svg(_report('free', [0, 0, 0]), tmp_path / 'empty.svg')
    assert not (tmp_path / 'empty.svg').exists()
