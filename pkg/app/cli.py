"""
Command line: python -m app <test|simulate|experiment|tabulate|power> ...

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

import argparse
import logging
import os
import sys

from config import settings
from libs import dataformatter, permutation, power
from libs.errors import TrendPermError
from libs.experiment import run_experiment, run_power_study
from libs.processes import GENERATORS, PARAMETERS, ProcessSpec, simulate
from libs.series import RandomBreak
from libs.trend_tests import LOCAL_METHODS, METHODS, normalize_method, run_method

logger = logging.getLogger('trendperm.cli')

METHOD_CHOICES = [m.replace('_', '-') for m in METHODS]
# simulate flag dest -> process parameter
PROCESS_FLAGS = {'m': 'm', 'rho': 'rho', 'phi0': 'phi0', 'phi1': 'phi1', 'dist': 'dist', 'df': 'df',
                 'chain_M': 'M', 'epsilon': 'epsilon', 'c': 'c'}


def _float_list(text):
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog='trendperm', description='Permutation tests for monotone trend.')
    parser.add_argument('--verbose', '-v', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    # TEST
    p = sub.add_parser('test', help='run one trend test on a series file')
    p.add_argument('series', help='text file (one value per line) or single-column CSV')
    p.add_argument('--method', default='global-stud', choices=METHOD_CHOICES)
    p.add_argument('--alpha', type=float, default=settings.ALPHA)
    p.add_argument('--side', default=settings.SIDE, choices=permutation.SIDES)
    p.add_argument('--perms', type=int, default=settings.N_PERMS, help='sampled permutations B')
    p.add_argument('--exact', action='store_true', help='enumerate all n! permutations (small n)')
    p.add_argument('--tabulated', action='store_true', help='use the cached null of the identity series')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--M', type=int, default=None, help='local test order')
    p.add_argument('--bandwidth', type=int, default=None, help='b_n (default [n^(1/3)])')
    p.add_argument('--eps', type=float, default=settings.EPS)
    p.add_argument('--break-ties', type=int, default=None, metavar='SEED', help='allow ties, broken by a seeded shuffle')
    p.add_argument('--json', action='store_true', help='also print a JSON record')

    # SIMULATE
    p = sub.add_parser('simulate', help='write a simulated series')
    p.add_argument('--process', required=True, choices=list(GENERATORS))
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--m', type=int)
    p.add_argument('--rho', type=float)
    p.add_argument('--phi0', type=float)
    p.add_argument('--phi1', type=float)
    p.add_argument('--dist', choices=['gaussian', 'uniform', 'student_t'])
    p.add_argument('--df', type=float)
    p.add_argument('--chain-M', dest='chain_M', type=int, help='Markov chain half-width M')
    p.add_argument('--epsilon', type=float)
    p.add_argument('--c', type=float)
    p.add_argument('--h', type=float, default=0.0, help='linear drift h·i/n^(3/2)')
    p.add_argument('--out', required=True)

    # EXPERIMENT
    p = sub.add_parser('experiment', help='run a Monte Carlo config and write the result CSV')
    p.add_argument('--config', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--workers', type=int, default=None)

    # TABULATE
    p = sub.add_parser('tabulate', help='precompute and persist permutation nulls')
    p.add_argument('--statistic', required=True, choices=sorted(permutation.STATISTIC_CODES))
    p.add_argument('--n', type=int, required=True, nargs='+')
    p.add_argument('--M', type=int, default=None, help='local window g')
    p.add_argument('--bandwidth', type=int, default=None)
    p.add_argument('--eps', type=float, default=settings.EPS)
    p.add_argument('--perms', type=int, default=settings.N_PERMS)
    p.add_argument('--exact', action='store_true')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out-dir', default=settings.TABLE_DIR)

    # POWER
    p = sub.add_parser('power', help='empirical vs theoretical local power as CSV')
    p.add_argument('--config', help='power-study config; omit for the theoretical curve only')
    p.add_argument('--h', type=_float_list, default=[0.0, 2.0, 4.0, 6.0])
    p.add_argument('--alpha', type=float, default=settings.ALPHA)
    p.add_argument('--rho', type=float, default=None, help='AR(1) base instead of white noise')
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--out', required=True)
    return parser


def cmd_test(args, parser):
    method = normalize_method(args.method)
    if method in LOCAL_METHODS and args.M is None:
        parser.error(f"--M is required for {args.method}")
    tie_policy = 'reject' if args.break_ties is None else RandomBreak(args.break_ties)
    series = dataformatter.read_series(args.series, tie_policy)
    report = run_method(method, series, alpha=args.alpha, side=args.side, B=None if args.exact else args.perms,
                        seed=args.seed, M=args.M, b_n=args.bandwidth, eps=args.eps, tabulated=args.tabulated)
    print(dataformatter.format_report(report))
    if args.json:
        print(dataformatter.report_json(report))
    return 0


def cmd_simulate(args, parser):
    params = {PROCESS_FLAGS[k]: getattr(args, k) for k in PROCESS_FLAGS if getattr(args, k) is not None}
    extra = set(params) - set(PARAMETERS[args.process])
    if extra:
        parser.error(f"process {args.process} does not take {', '.join(sorted(extra))}")
    spec = ProcessSpec(args.process, args.n, seed=args.seed, params=params, drift=args.h)
    dataformatter.write_series(simulate(spec), args.out)
    logger.info(f"cmd_simulate() > wrote {args.n} values to {args.out}")
    return 0


def cmd_experiment(args, parser):
    config = dataformatter.read_config(args.config)
    table = run_experiment(config, workers=args.workers)
    dataformatter.write_csv(table, args.out)
    failed = int(table.frame['reject_rate'].isna().sum())
    if failed:
        print(f"{failed} row(s) failed; see the log", file=sys.stderr)
    return 0


def cmd_tabulate(args, parser):
    if args.statistic in permutation.LOCAL_KINDS and args.M is None:
        parser.error(f"--M is required for {args.statistic}")
    os.makedirs(args.out_dir, exist_ok=True)
    for n in args.n:
        dist = permutation.tabulate_null(n, args.bandwidth, args.statistic, None if args.exact else args.perms,
                                         args.seed, g=args.M, eps=args.eps)
        path = permutation.save_table(dist, os.path.join(args.out_dir, permutation.table_filename(dist)))
        print(path)
    return 0


def cmd_power(args, parser):
    if args.config is None:
        power.prediction_table(args.h, args.alpha, args.rho).to_csv(args.out, index=False, lineterminator='\n')
        return 0
    study = run_power_study(dataformatter.read_config(args.config), workers=args.workers)
    dataformatter.write_power_csv(study.frame, args.out)
    for column, gap in study.matches.items():
        print(f"{column}: max gap {gap:.4f} ({'match' if gap <= 0.05 else 'no match'})")
    return 0


COMMANDS = {
    'test': cmd_test,
    'simulate': cmd_simulate,
    'experiment': cmd_experiment,
    'tabulate': cmd_tabulate,
    'power': cmd_power,
}


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings.configure_logging('DEBUG' if args.verbose else None)
        return COMMANDS[args.command](args, parser)
    except SystemExit as e:
        # argparse: --help exits 0, usage errors exit 2
        return e.code if isinstance(e.code, int) else 2
    except (TrendPermError, OSError) as e:
        print(dataformatter.format_error(e), file=sys.stderr)
        return 1
