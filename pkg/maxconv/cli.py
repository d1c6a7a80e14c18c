"""Command-line interface of maxconv

Exit codes: 0 on success, 1 when an argument is outside the domain of an operation,
2 on usage errors and 3 when a verified bound is violated (the report is still written).
"""
import argparse
import json
import logging
import sys
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from maxconv.distributions import FAMILY_NAMES, Cdf, ConvolutionKind, EvDistribution, EvFamily, GridCdf, scale_cdf
from maxconv.models import ReportModel
from maxconv.models.run import Command, OutputFormat, RunConfig, Suite, parse_n_spec
from maxconv.ratelab import (check_algebra, check_dagum_lipschitz, check_rescaling, check_sandwich, check_tail_chain,
                             interior_bound_experiment, rate_experiment)
from maxconv.scaling import RhoSolver, scaling
from maxconv.semigroup import power_cdf
from maxconv.utils.plotting import render_rate_svg
from maxconv.utils.validation import DomainError, SolverError
from maxconv.version import app_name
from maxconv.vonmises import AuxFn, TabulatedAux, frechet_aux, verify_von_mises

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_VIOLATION = 3


class UsageError(Exception):
    """Arguments are well-formed but cannot be combined"""


def _format(value: float) -> str:
    return '{:.15g}'.format(value)


def _floats(text: str) -> List[float]:
    """Parse a comma-separated list of numbers"""
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma-separated numbers, received {text!r}') from None


def _n_list(text: str) -> List[int]:
    try:
        return parse_n_spec(text)
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _distribution(family: str, alpha: float) -> Cdf:
    return EvDistribution(EvFamily.from_name(family, alpha))


def _aux(config: RunConfig) -> Optional[AuxFn]:
    """Auxiliary function from the --aux file, or alpha / (x^alpha - 1) for the Frechet and Dagum families"""
    if config.aux is not None:
        return TabulatedAux.from_json(config.aux)
    if config.family in ('frechet', 'dagum'):
        return frechet_aux(config.alpha)
    raise UsageError(f'no auxiliary function is known for the {config.family} family; provide one with --aux')


def _write_lines(lines: Iterable[str], output=None):
    text = '\n'.join(lines) + '\n'
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, 'w') as fp:
            fp.write(text)


def _table(header: Sequence[str], columns: Sequence[np.ndarray]) -> List[str]:
    lines = [','.join(header)]
    for values in zip(*columns):
        lines.append(','.join(_format(float(v)) for v in values))
    return lines


def cmd_dist(args: argparse.Namespace) -> int:
    """Print (x, cdf, sf) triples or (p, quantile) pairs of a distribution"""
    if args.grid is not None:
        F = GridCdf.from_csv(args.grid)
    else:
        F = _distribution(args.family, args.alpha)

    lines = []
    if args.x:
        x = np.asarray(args.x, dtype=float)
        lines += [','.join(_format(v) for v in row) for row in zip(x, F.cdf(x), F.sf(x))]
    if args.p:
        p = np.asarray(args.p, dtype=float)
        lines += [','.join(_format(v) for v in row) for row in zip(p, F.quantile(p))]
    if not lines:
        raise UsageError('supply points with --x or levels with --p')
    _write_lines(lines, args.output)
    return EXIT_OK


def cmd_power(args: argparse.Namespace) -> int:
    """Print (x, cdf, sf) of the n-fold power, optionally at the normalized points a_n x"""
    config = RunConfig(command=Command.power, family=args.family, alpha=args.alpha, kind=args.kind)
    F = _distribution(config.family, config.alpha)
    if args.normalize:
        F = scale_cdf(F, scaling(F, args.n).a_n)
    powered = power_cdf(F, args.n, config.kind)
    x = np.asarray(args.x, dtype=float)
    _write_lines(_table(['x', 'cdf', 'sf'], [x, powered.cdf(x), powered.sf(x)]), args.output)
    return EXIT_OK


def cmd_scaling(args: argparse.Namespace) -> int:
    """Print the normalization constants for a list of n"""
    config = RunConfig(command=Command.scaling, family=args.family, alpha=args.alpha,
                       kind=ConvolutionKind.classical, n=args.n)
    F = _distribution(config.family, config.alpha)
    triples = [scaling(F, n) for n in config.n]
    columns = [[t.n for t in triples], [t.a_n for t in triples], [t.a_n_prime for t in triples], [t.A_n for t in triples]]
    _write_lines(_table(['n', 'a_n', 'a_n_prime', 'A_n'], columns), args.output)
    return EXIT_OK


def cmd_rho(args: argparse.Namespace) -> int:
    """Print rho<-(t) or rho(x)"""
    config = RunConfig(command=Command.rho, alpha=args.alpha, aux=args.aux)
    solver = RhoSolver(config.alpha, _aux(config))
    lines = []
    if args.t:
        t = np.asarray(args.t, dtype=float)
        lines += _table(['t', 'rho_inverse'], [t, np.atleast_1d(solver.rho_inverse(t))])
    if args.x:
        lines += _table(['x', 'rho'], [args.x, [solver.rho(x) for x in args.x]])
    if not lines:
        raise UsageError('supply --t or --x')
    _write_lines(lines, args.output)
    return EXIT_OK


def _run_suite(suite: Suite, args: argparse.Namespace, config: RunConfig) -> List[ReportModel]:
    """Run one verification suite and return its reports"""
    points = args.points
    if suite == Suite.homomorphism:
        return [check_algebra(samples=args.samples, seed=args.seed)]
    if suite == Suite.dagum_lipschitz:
        return [check_dagum_lipschitz(args.alpha1, args.alpha2, tol=config.tol)]

    F = _distribution(config.family, config.alpha)
    if suite == Suite.vonmises:
        g = _aux(config)
        grid = np.geomspace(1.1 * g.valid_from, max(1e6, 2 * g.valid_from), points)
        return [verify_von_mises(F, config.alpha, g, grid)]
    if suite == Suite.sandwich:
        g = _aux(config)
        grid = np.linspace(0.02, 0.98, points)
        return [check_sandwich(F, config.alpha, g, n, grid) for n in config.n]
    if suite == Suite.tail_chain:
        grid = np.geomspace(1, 1e3, points)
        return [check_tail_chain(F, config.alpha, n, grid) for n in config.n]
    if suite == Suite.rescaling:
        grid = np.linspace(0.01, 0.99, points)
        return [check_rescaling(config.alpha, scaling(F, n).A_n, grid) for n in config.n]
    if suite == Suite.interior:
        return [interior_bound_experiment(F, config.alpha, _aux(config), config.n, config.tol)]
    raise UsageError(f'unknown suite {suite}')


def cmd_verify(args: argparse.Namespace) -> int:
    """Run a verification suite and print a JSON verdict"""
    config = RunConfig(command=Command.verify, family=args.family, alpha=args.alpha, kind=ConvolutionKind.classical,
                       n=args.n or [10000], tol=args.tol, suite=args.suite, aux=args.aux, output=args.output)
    reports = _run_suite(config.suite, args, config)
    passed = all(r.passed for r in reports)
    verdict = {'suite': config.suite.value, 'passed': passed, 'reports': [r.to_dict() for r in reports]}
    _write_lines([json.dumps(verdict, indent=2)], config.output)
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_rate(args: argparse.Namespace) -> int:
    """Run a rate experiment and write the report"""
    config = RunConfig(command=Command.rate, family=args.family, alpha=args.alpha, kind=args.kind, n=args.n,
                       tol=args.tol, output=args.output, format=args.format, aux=args.aux)
    if config.family != 'frechet' and config.aux is None:
        raise UsageError(f'rate experiments support the frechet family; provide --aux to use {config.family}')
    if config.format == OutputFormat.svg and config.output is None:
        raise UsageError('--format svg requires --output')

    F = _distribution(config.family, config.alpha)
    report = rate_experiment(config.kind, F, config.alpha, _aux(config), config.n, config.tol,
                             config_echo=config.model_dump(mode='json'))

    if config.format == OutputFormat.csv:
        text = report.to_csv(config.output)
        if config.output is None:
            sys.stdout.write(text)
    elif config.format == OutputFormat.json:
        text = report.to_json(config.output)
        if config.output is None:
            sys.stdout.write(text + '\n')
    else:
        render_rate_svg(report, config.output)

    if not report.passed:
        logger.warning(f'Bound violated: onset={report.onset_n0}, assertions={report.assertions}, unconverged={report.unconverged}')
        return EXIT_VIOLATION
    return EXIT_OK


_COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    Command.dist.value: cmd_dist,
    Command.power.value: cmd_power,
    Command.scaling.value: cmd_scaling,
    Command.rho.value: cmd_rho,
    Command.verify.value: cmd_verify,
    Command.rate.value: cmd_rate,
}


def make_parser() -> argparse.ArgumentParser:
    """Build the argument parser"""
    parser = argparse.ArgumentParser(prog='maxconv', description='Max-convolution calculus and certified rate measurements')
    parser.add_argument('--version', action='version', version=app_name)
    parser.add_argument('--verbose', '-v', action='store_true', help='Log debugging messages to stderr')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def family_args(sub, with_kind=False):
        sub.add_argument('--family', default='frechet', choices=FAMILY_NAMES, help='Distribution family')
        sub.add_argument('--alpha', type=float, default=1.0, help='Tail index (magnitude)')
        if with_kind:
            sub.add_argument('--kind', default='boolean', choices=[k.value for k in ConvolutionKind], help='Calculus')
        sub.add_argument('--output', '-o', default=None, help='Output file (default: standard output)')

    sub = subparsers.add_parser('dist', help='Evaluate a distribution function')
    family_args(sub)
    sub.add_argument('--x', type=_floats, default=[], help='Comma-separated points')
    sub.add_argument('--p', type=_floats, default=[], help='Comma-separated levels at which to evaluate the quantile')
    sub.add_argument('--grid', default=None, help='Two-column (x, p) CSV file describing a step distribution')

    sub = subparsers.add_parser('power', help='Evaluate an n-fold max-convolution power')
    family_args(sub, with_kind=True)
    sub.add_argument('--n', type=float, required=True, help='Power (a real number >= 1)')
    sub.add_argument('--x', type=_floats, required=True, help='Comma-separated points')
    sub.add_argument('--normalize', action='store_true', help='Evaluate at a_n x instead of x')

    sub = subparsers.add_parser('scaling', help='Tabulate a_n, a_n\' and A_n')
    family_args(sub)
    sub.add_argument('--n', type=_n_list, required=True, help='start:stop:points or a comma-separated list')

    sub = subparsers.add_parser('rho', help='Evaluate rho<- and rho')
    sub.add_argument('--alpha', type=float, default=1.0, help='Tail index')
    sub.add_argument('--aux', default=None, help='JSON file with a tabulated auxiliary function')
    sub.add_argument('--t', type=_floats, default=[], help='Points at which to evaluate rho<-')
    sub.add_argument('--x', type=_floats, default=[], help='Points at which to evaluate rho')
    sub.add_argument('--output', '-o', default=None, help='Output file (default: standard output)')

    sub = subparsers.add_parser('verify', help='Run a verification suite')
    family_args(sub)
    sub.add_argument('--suite', required=True, choices=[s.value for s in Suite], help='Suite to run')
    sub.add_argument('--n', type=_n_list, default=None, help='Powers to check (default: 10000)')
    sub.add_argument('--tol', type=float, default=1e-8, help='Width of certified brackets')
    sub.add_argument('--aux', default=None, help='JSON file with a tabulated auxiliary function')
    sub.add_argument('--alpha1', type=float, default=1.0, help='First Dagum index (dagum-lipschitz)')
    sub.add_argument('--alpha2', type=float, default=2.0, help='Second Dagum index (dagum-lipschitz)')
    sub.add_argument('--samples', type=int, default=10000, help='Random samples (homomorphism)')
    sub.add_argument('--seed', type=int, default=0, help='Random seed (homomorphism)')
    sub.add_argument('--points', type=int, default=50, help='Grid points per check')

    sub = subparsers.add_parser('rate', help='Measure the convergence rate to the limit law')
    family_args(sub, with_kind=True)
    sub.add_argument('--n', type=_n_list, required=True, help='start:stop:points or a comma-separated list')
    sub.add_argument('--tol', type=float, default=1e-8, help='Width of certified brackets')
    sub.add_argument('--aux', default=None, help='JSON file with a tabulated auxiliary function')
    sub.add_argument('--format', default='csv', choices=[f.value for f in OutputFormat], help='Output format')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``maxconv`` command

    Args:
        argv: Arguments (default: ``sys.argv[1:]``)
    Returns:
        (int) Exit code
    """
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ValidationError) as exc:
        print(f'maxconv {args.command}: {exc}', file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SolverError) as exc:
        print(f'maxconv {args.command}: {exc}', file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == '__main__':
    sys.exit(main())
