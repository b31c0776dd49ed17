"""
Shared pieces of the harness commands.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.
"""
import contextlib
import functools
import sys

from django.core.management.base import BaseCommand, CommandError

from splines.exceptions import ConfigError, DomainError, SolverFailure, SplineError
from splines.polyroots import RootMethod

from experiments.datasets import DatasetError, generate_data, load_dataset
from experiments.solver_config import get_fit_config

USAGE_ERROR = 1
DATA_ERROR = 2
SOLVER_FAILURE = 3


def _usage_error(parser, message):
    if not parser.called_from_command_line:
        raise CommandError(f'Error: {message}', returncode=USAGE_ERROR)
    parser.print_usage(sys.stderr)
    parser.exit(USAGE_ERROR, f'{parser.prog}: error: {message}\n')


def int_list(value):
    """
    Parses "3,4,5" or inclusive ranges like "0-19" into a list of ints
    """
    numbers = []
    for part in value.split(','):
        part = part.strip()
        if not part:
            continue
        first, dash, last = part.partition('-')
        try:
            if dash and first:
                numbers.extend(range(int(first), int(last) + 1))
            else:
                numbers.append(int(part))
        except ValueError:
            raise CommandError(f'Error: not an integer list: {value!r}', returncode=USAGE_ERROR) from None
    return numbers


def float_pair(value):
    try:
        lower, upper = (float(part) for part in value.split(','))
    except ValueError:
        raise CommandError(f'Error: expected "lower,upper", got {value!r}', returncode=USAGE_ERROR) from None
    return lower, upper


class SplineCommand(BaseCommand):
    """
    Base command: argparse errors exit with code 1 and library errors are
    mapped onto the harness exit codes
    """
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = functools.partial(_usage_error, parser)
        return parser

    def add_fit_arguments(self, parser, many_degrees=False):
        parser.add_argument('--degree', type=str if many_degrees else int,
                            help='spline degree' + (' list, e.g. 3,4' if many_degrees else ''))
        parser.add_argument('--lambda', dest='lam', type=float, help='smoothing parameter')
        parser.add_argument('--epsilon', type=float, help='cutting-plane tolerance')
        parser.add_argument('--grid', type=int, help='grid points per interval for minima and the oracle')
        parser.add_argument('--max-cp-iterations', type=int)
        parser.add_argument('--roots', choices=[RootMethod.CLOSED_FORM.value, RootMethod.COMPANION_MATRIX.value],
                            help='lower-level root strategy')
        parser.add_argument('--shift', action='store_true', default=None,
                            help='shift the cutting-plane result up by its most negative value')

    def add_data_arguments(self, parser):
        parser.add_argument('--input', help='dataset CSV with header x,y')
        parser.add_argument('--n', type=int, help='generate samples x = 0..n instead of reading --input')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--allow-negative', action='store_true', help='accept negative y values')

    def fit_config(self, options, **overrides):
        values = {
            'degree': options.get('degree'),
            'lam': options.get('lam'),
            'epsilon': options.get('epsilon'),
            'grid_points': options.get('grid'),
            'max_cp_iterations': options.get('max_cp_iterations'),
            'root_strategy': options.get('roots'),
            'shift_negative': options.get('shift'),
        }
        values.update(overrides)
        try:
            return get_fit_config(**values)
        except ConfigError as exc:
            raise CommandError(f'Error: {exc}', returncode=USAGE_ERROR) from exc

    def dataset(self, options):
        if options.get('input'):
            with self.translate_errors():
                return load_dataset(options['input'], allow_negative=options.get('allow_negative', False))
        if options.get('n') is None:
            raise CommandError('Error: give --input or --n', returncode=USAGE_ERROR)
        with self.translate_errors():
            return generate_data(options['n'], options['seed'])

    @contextlib.contextmanager
    def translate_errors(self):
        try:
            yield
        except (DatasetError, DomainError) as exc:
            raise CommandError(str(exc), returncode=DATA_ERROR) from exc
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc
        except SolverFailure as exc:
            raise CommandError(f'solver failure: {exc}', returncode=SOLVER_FAILURE) from exc
        except SplineError as exc:
            raise CommandError(str(exc), returncode=SOLVER_FAILURE) from exc
