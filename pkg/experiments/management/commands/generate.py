from experiments.datasets import save_dataset

from ._base import SplineCommand


class Command(SplineCommand):
    help = 'Generate a seeded synthetic nonnegative dataset and write it as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='samples are x = 0..n')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--output', required=True, help='CSV path')

    def handle(self, *args, **options):
        dataset = self.dataset(options)
        path = save_dataset(dataset, options['output'])
        self.stdout.write(self.style.SUCCESS(f'wrote {dataset.n + 1} samples to {path}'))
