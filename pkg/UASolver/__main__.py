# -*- coding: utf-8 -*-
# --------------------------
# Copyright © 2022 -            Qentinel Group.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ---------------------------
import argparse
import sys
from typing import Optional, Sequence

from robot import libdoc
from robot.api import logger
from UASolver._version import get_versions
from UASolver.internal.exceptions import UAGateFailure, UASolverException
from UASolver.internal.experiment import run_experiment, run_solve
from UASolver.internal.presets import list_presets, load_spec
from UASolver.internal.problems import PROBLEMS

__version__ = get_versions()['version']

# subcommand -> experiment kind
EXPERIMENT_COMMANDS = {
    'convergence': 'convergence',
    'drift': 'drift',
    'compare-averaged': 'compare-averaged',
    'recover': 'recover-window',
    'diagnostics': 'diagnostics',
    'timing': 'timing',
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='UASolver',
        usage='python -m %(prog)s [-h] [-V] COMMAND [options]'
        '\n\nEXAMPLES:\n'
        '%(prog)s convergence --preset hh3-default --out results/hh3\n'
        '%(prog)s drift --config my_drift.json --workers 4\n'
        '%(prog)s solve --problem hh3 --eps 0.001,0.000001 --dt 0.1 --t-final 1 --out ua.csv\n'
        '%(prog)s keywords --show SolveUA',
        description='Runs the multiscale solver and its experiments. Exit code 0 means all '
        'gates passed, 1 a gate failure and 2 a configuration or convergence error.')
    parser.add_argument('-V',
                        '--version',
                        action='version',
                        version='%(prog)s {version}'.format(version=__version__))
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')

    solve = commands.add_parser('solve', help='solve one registered problem')
    solve.add_argument('--problem', required=True, help='registered problem name')
    solve.add_argument('--eps', help='comma separated scales, largest first')
    solve.add_argument('--dt', type=float, required=True, help='time step')
    solve.add_argument('--t-final', type=float, required=True, help='final time')
    solve.add_argument('--method', default='ua', choices=('ua', 'direct', 'averaged',
                                                          'reference'))
    solve.add_argument('--x0', help='comma separated initial state')
    solve.add_argument('--out', help='trajectory CSV path')

    for command, kind in EXPERIMENT_COMMANDS.items():
        sub = commands.add_parser(command, help='run a {} experiment'.format(kind))
        source = sub.add_mutually_exclusive_group(required=True)
        source.add_argument('--config', help='JSON experiment config')
        source.add_argument('--preset', help='shipped preset name')
        sub.add_argument('--out', help='output directory, the config\'s output when omitted')
        sub.add_argument('--workers', type=int, help='worker processes')

    commands.add_parser('list-problems', help='list registered problems')
    commands.add_parser('list-presets', help='list shipped experiment presets')

    docs = commands.add_parser('keywords', help='library keyword documentation')
    docs.add_argument('-A', '--all', action='store_true', help='lists ALL keywords')
    docs.add_argument('-L', '--list', action='store', help='lists keywords based on input string')
    docs.add_argument('-S', '--show', action='store', help='show docs for keyword(s)')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        if args.command == 'solve':
            traj = run_solve(args.problem, args.eps and args.eps.split(','), args.dt,
                             args.t_final, method=args.method,
                             x0=args.x0 and args.x0.split(','), out=args.out)
            print('{} solve finished at t={}: {}'.format(
                args.method, traj.final_time, ' '.join('{:.10g}'.format(v)
                                                      for v in traj.final_state)))
            return 2 if traj.failed else 0
        if args.command in EXPERIMENT_COMMANDS:
            spec = load_spec(config=args.config, preset=args.preset,
                             kind=EXPERIMENT_COMMANDS[args.command])
            report = run_experiment(spec, args.out, args.workers)
            for name, ok in report.verdicts.items():
                print('{:<40} {:>12.4g}  {}'.format(name, report.metrics.get(name, float('nan')),
                                                    'pass' if ok else 'FAIL'))
            report.raise_on_failure()
            return 0
        if args.command == 'list-problems':
            for entry in PROBLEMS.values():
                print('{:<14} {} (default eps {})'.format(entry.name, entry.description,
                                                          entry.default_eps))
            return 0
        if args.command == 'list-presets':
            print('\n'.join(list_presets()))
            return 0
        if args.command == 'keywords':
            # handle known options
            if args.all:
                libdoc.libdoc_cli(["UASolver", "list"], exit=False)
            elif args.list:
                libdoc.libdoc_cli(["UASolver", "list", args.list], exit=False)
            elif args.show:
                libdoc.libdoc_cli(["UASolver", "show", args.show], exit=False)
            return 0
        parser.print_help()
        return 0
    except UAGateFailure as e:
        logger.error(str(e))
        return 1
    except UASolverException as e:
        logger.error('{}: {}'.format(type(e).__name__, e))
        return 2


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
