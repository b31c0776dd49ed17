import json
from pathlib import Path

from django.core.management.base import CommandError

from splines.smoothers import Method, fit

from experiments.plots import plot_fits
from experiments.serializers import FitResultSerializer

from ._base import USAGE_ERROR, SplineCommand, float_pair


class Command(SplineCommand):
    help = 'Fit one dataset with one or more smoothing methods'

    def add_arguments(self, parser):
        self.add_data_arguments(parser)
        self.add_fit_arguments(parser)
        parser.add_argument('--method', default=Method.CUTTING_PLANE.value,
                            help='comma separated: ' + ', '.join(method.value for method in Method))
        parser.add_argument('--output', help='write the fit results as JSON')
        parser.add_argument('--plot', help='write an SVG overlay to this path')
        parser.add_argument('--magnify', type=float_pair, help='x range "lower,upper" for a zoomed panel')

    def handle(self, *args, **options):
        methods = [name.strip() for name in options['method'].split(',') if name.strip()]
        for name in methods:
            if name not in {method.value for method in Method}:
                raise CommandError(f'Error: unknown method {name!r}', returncode=USAGE_ERROR)
        config = self.fit_config(options)
        dataset = self.dataset(options)

        results = {}
        with self.translate_errors():
            for name in methods:
                results[name] = fit(name, dataset, config=config)

        for name, result in results.items():
            self.stdout.write(
                f'{name:<20} cost={result.cost:.12g} termination={result.termination.value} '
                f'iterations={result.cp_iterations} cuts={result.total_cuts} '
                f'grid_min={result.grid_min:.3e} time={1e3 * result.wall_time:.1f}ms'
            )

        if options.get('output'):
            path = Path(options['output'])
            path.parent.mkdir(parents=True, exist_ok=True)
            payload = {name: FitResultSerializer(result).data for name, result in results.items()}
            path.write_text(json.dumps(payload, indent=2) + '\n', encoding='utf-8')
            self.stdout.write(self.style.SUCCESS(f'wrote {path}'))
        if options.get('plot') and results:
            fits = {name: result.coefficients for name, result in results.items()}
            path = plot_fits(dataset, fits, options['plot'], magnify=options.get('magnify'))
            self.stdout.write(self.style.SUCCESS(f'wrote {path}'))
