"""
Synthetic data generation and dataset CSV input/output
"""
import csv
import logging
from pathlib import Path

import numpy as np

from splines.data import Dataset, Provenance
from splines.exceptions import DomainError

from .serializers import SampleSerializer

logger = logging.getLogger(__name__)

CSV_HEADER = ['x', 'y']
# Indices i with i % 5 in this set are scaled down by SMALL_SCALE.
SMALL_RESIDUES = (2, 3)
SMALL_SCALE = 100.0


class DatasetError(ValueError):
    """
    Malformed dataset file; row numbers count the header as row 1
    """

    def __init__(self, message, row=None):
        super().__init__(f'row {row}: {message}' if row is not None else message)
        self.row = row


def standard_normals(count, seed):
    """
    Portable standard normal draws: Philox 64-bit counter-based raw output,
    53-bit uniforms in (0, 1), then Box-Muller pairs
    """
    pairs = (count + 1) // 2
    raw = np.random.Philox(seed).random_raw(2 * pairs)
    uniforms = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    u1, u2 = uniforms[0::2], uniforms[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]).ravel()[:count]


def generate_data(n, seed):
    """
    Samples at x_i = i for i = 0..n with y_i = |z_i|, divided by 100 where
    i % 5 is 2 or 3
    """
    if int(n) != n or n < 1:
        raise DomainError('n must be a positive integer')
    n = int(n)
    index = np.arange(n + 1)
    y = np.abs(standard_normals(n + 1, seed))
    small = np.isin(index % 5, SMALL_RESIDUES)
    y[small] /= SMALL_SCALE
    logger.debug('generated n=%d seed=%s', n, seed)
    return Dataset(x=index.astype(float), y=y, seed=seed, provenance=Provenance.GENERATED)


def save_dataset(dataset, path):
    """
    Writes `x,y` CSV with 17 significant digits, which round-trips exactly
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as handle:
        handle.write(','.join(CSV_HEADER) + '\n')
        for x, y in zip(dataset.x, dataset.y):
            handle.write(f'{x:.17g},{y:.17g}\n')
    return path


def _first_error(errors):
    field, messages = next(iter(errors.items()))
    return f'{field}: {messages[0]}'


def load_dataset(path, allow_negative=False):
    """
    Reads a dataset CSV, validating each row with SampleSerializer
    """
    path = Path(path)
    try:
        handle = path.open('r', encoding='utf-8', newline='')
    except OSError as exc:
        raise DatasetError(f'cannot open {path}: {exc.strerror}') from exc

    xs, ys = [], []
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [cell.strip() for cell in header] != CSV_HEADER:
            raise DatasetError('header must be "x,y"', row=1)
        for row, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != 2:
                raise DatasetError(f'expected 2 fields, got {len(fields)}', row=row)
            serializer = SampleSerializer(
                data={'x': fields[0].strip(), 'y': fields[1].strip()},
                context={'allow_negative': allow_negative},
            )
            if not serializer.is_valid():
                raise DatasetError(_first_error(serializer.errors), row=row)
            x, y = serializer.validated_data['x'], serializer.validated_data['y']
            if xs and x <= xs[-1]:
                raise DatasetError('x values must be strictly increasing', row=row)
            xs.append(x)
            ys.append(y)

    if len(xs) < 2:
        raise DatasetError('a dataset needs at least two samples')
    return Dataset(
        x=np.array(xs),
        y=np.array(ys),
        provenance=Provenance.LOADED,
        require_nonnegative=not allow_negative,
    )
