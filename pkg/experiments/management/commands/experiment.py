import json

from django.conf import settings
from django.core.management.base import CommandError

from experiments.runner import run_experiment
from experiments.serializers import ExperimentSpecSerializer
from experiments.solver_config import get_default_methods, get_fit_config

from ._base import SOLVER_FAILURE, USAGE_ERROR, SplineCommand, float_pair, int_list


class Command(SplineCommand):
    help = 'Run a grid of (n, degree, seed, method) fits and write report.csv, summary.json and SVG plots'

    def add_arguments(self, parser):
        self.add_fit_arguments(parser, many_degrees=True)
        parser.add_argument('--spec', help='JSON file with experiment fields; flags override it')
        parser.add_argument('--n', help='sample counts, e.g. 5,10,50')
        parser.add_argument('--seed', help='seeds, e.g. 0-19 or 1,2,3')
        parser.add_argument('--method', help='comma separated methods; an empty string runs nothing')
        parser.add_argument('--output', help='output directory')
        parser.add_argument('--plot', action='store_true', default=None, help='write one SVG per (n, d, seed)')
        parser.add_argument('--magnify', type=float_pair, help='x range "lower,upper" for a zoomed panel')
        parser.add_argument('--workers', type=int)

    def _spec_data(self, options):
        data = {}
        if options.get('spec'):
            try:
                with open(options['spec'], encoding='utf-8') as handle:
                    data = json.load(handle)
            except (OSError, ValueError) as exc:
                raise CommandError(f'Error: cannot read spec: {exc}', returncode=USAGE_ERROR) from exc

        defaults = get_fit_config()
        data.setdefault('n_values', [10])
        data.setdefault('degrees', [defaults.degree])
        data.setdefault('seeds', [0])
        data.setdefault('methods', get_default_methods())
        data.setdefault('output_dir', settings.NNSPLINE.get('OUTPUT_DIR', 'results'))
        data.setdefault('workers', settings.NNSPLINE.get('WORKERS', 1))

        if options.get('n') is not None:
            data['n_values'] = int_list(options['n'])
        if options.get('degree') is not None:
            data['degrees'] = int_list(options['degree'])
        if options.get('seed') is not None:
            data['seeds'] = int_list(options['seed'])
        if options.get('method') is not None:
            data['methods'] = [name.strip() for name in options['method'].split(',') if name.strip()]
        flags = {
            'lam': options.get('lam'),
            'epsilon': options.get('epsilon'),
            'grid_points': options.get('grid'),
            'max_cp_iterations': options.get('max_cp_iterations'),
            'root_strategy': options.get('roots'),
            'shift_negative': options.get('shift'),
            'output_dir': options.get('output'),
            'plot': options.get('plot'),
            'workers': options.get('workers'),
        }
        data.update({key: value for key, value in flags.items() if value is not None})
        if options.get('magnify') is not None:
            data['magnify'] = list(options['magnify'])
        return data

    def handle(self, *args, **options):
        serializer = ExperimentSpecSerializer(data=self._spec_data(options))
        if not serializer.is_valid():
            raise CommandError(f'Error: invalid experiment: {dict(serializer.errors)}', returncode=USAGE_ERROR)
        with self.translate_errors():
            spec = serializer.save()
            report = run_experiment(spec)

        self.stdout.write(f'{len(report.outcomes)} cells, {len(report.failed)} failed')
        self.stdout.write(f'wrote {report.csv_path}')
        self.stdout.write(f'wrote {report.json_path}')
        for path in report.plot_paths:
            self.stdout.write(f'wrote {path}')
        if report.solver_failed:
            raise CommandError('solver failure in at least one cell', returncode=SOLVER_FAILURE)
        self.stdout.write(self.style.SUCCESS('experiment finished'))
