import json
from pathlib import Path

from django.core.management.base import CommandError

from experiments.verification import run_verification

from ._base import SOLVER_FAILURE, SplineCommand


class Command(SplineCommand):
    help = 'Check a cutting-plane fit against the dense-grid oracle, its KKT certificate and the coefficient bound'

    def add_arguments(self, parser):
        self.add_data_arguments(parser)
        self.add_fit_arguments(parser)
        parser.add_argument('--output', help='write the verification report as JSON')

    def handle(self, *args, **options):
        config = self.fit_config(options)
        dataset = self.dataset(options)
        with self.translate_errors():
            report = run_verification(dataset, config)

        kkt = report.kkt
        self.stdout.write(f'cutting plane cost   {report.cutting_plane_cost:.12g} ({report.termination})')
        self.stdout.write(f'oracle cost          {report.oracle_cost:.12g}')
        self.stdout.write(f'relative gap         {report.relative_gap:.3e}')
        self.stdout.write(f'kkt stationarity     {kkt.stationarity:.3e}')
        self.stdout.write(f'kkt equality         {kkt.primal_eq:.3e}')
        self.stdout.write(f'kkt inequality       {kkt.primal_ineq:.3e}')
        self.stdout.write(f'kkt complementarity  {kkt.complementarity:.3e}')
        self.stdout.write(f'gamma                {report.gamma:.6g}')
        self.stdout.write(f'bound holds          {sum(report.bound_holds)}/{len(report.bound_holds)}')

        if options.get('output'):
            path = Path(options['output'])
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(report.as_dict(), indent=2) + '\n', encoding='utf-8')

        if not report.passed:
            raise CommandError('verification failed', returncode=SOLVER_FAILURE)
        self.stdout.write(self.style.SUCCESS('verification passed'))
