"""Log-log plots of rate reports"""
import logging
import math
from pathlib import Path
from typing import Union

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from maxconv.distributions import ConvolutionKind
from maxconv.models.reports import RateReport

logger = logging.getLogger(__name__)


def reference_curve(report: RateReport, ns: np.ndarray) -> np.ndarray:
    """Reference rate drawn next to the measurements

    alpha e^(1/2) n^(-1/2) for the Boolean calculus and 1/n otherwise
    """
    if report.kind == ConvolutionKind.boolean:
        return report.alpha * math.exp(0.5) / np.sqrt(ns)
    return 1. / ns


def render_rate_svg(report: RateReport, path: Union[str, Path]) -> Path:
    """Write a log-log plot of sup_hi against n with the reference rate

    Args:
        report: Rate report with at least one row
        path: Output file
    Returns:
        (Path) The written file
    """
    rows = [r for r in report.rows if r.sup_hi > 0]
    if not rows:
        raise ValueError('the report has no row with a positive distance to plot')
    ns = np.array([r.n for r in rows], dtype=float)
    sups = np.array([r.sup_hi for r in rows])

    fig = Figure(figsize=(6, 4.5))
    ax = fig.add_subplot()
    ax.loglog(ns, sups, marker='o', label='certified sup')
    reference = 'alpha e^(1/2) n^(-1/2)' if report.kind == ConvolutionKind.boolean else '1/n'
    ax.loglog(ns, reference_curve(report, ns), linestyle='--', color='gray', label=reference)
    if report.asserted_from is not None and report.asserted_from <= ns[-1]:
        ax.axvline(report.asserted_from, color='gray', linestyle=':', label=f'asserted from n={report.asserted_from}')
    ax.set_xlabel('n')
    ax.set_ylabel('sup |F_n - limit|')
    ax.set_title(f'{report.kind.value}: {report.label}')
    ax.legend()
    fig.tight_layout()

    # Fixed hash salt and no date keep the output byte-stable for a given report
    path = Path(path)
    with matplotlib.rc_context({'svg.hashsalt': 'maxconv'}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    logger.debug(f'Wrote {len(rows)} points to {path}')
    return path
