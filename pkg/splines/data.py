"""
Sample data sets fed to the smoothers
"""
import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bezier import Partition, frozen_array
from .exceptions import DomainError


class Provenance(str, enum.Enum):
    GENERATED = 'generated'
    LOADED = 'loaded'


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Samples (x_i, y_i) with strictly increasing x.

    With require_nonnegative set (the default) every y_i must be >= 0.
    """
    x: np.ndarray
    y: np.ndarray
    seed: Optional[int] = None
    provenance: Provenance = Provenance.GENERATED
    require_nonnegative: bool = True

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise DomainError('x and y must be one-dimensional and of equal length')
        if x.size < 2:
            raise DomainError('a data set needs at least two samples')
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError('samples must be finite')
        if np.any(np.diff(x) <= 0.0):
            raise DomainError('x must be strictly increasing')
        if self.require_nonnegative and np.any(y < 0.0):
            raise DomainError('y must be nonnegative')
        object.__setattr__(self, 'x', frozen_array(x))
        object.__setattr__(self, 'y', frozen_array(y))
        object.__setattr__(self, 'provenance', Provenance(self.provenance))

    @property
    def n(self):
        """
        Index of the last sample; the set holds n + 1 points
        """
        return self.x.size - 1

    @property
    def nonnegative(self):
        return bool(np.all(self.y >= 0.0))

    def partition(self):
        """
        Knots at the sample abscissae
        """
        return Partition(self.x)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None
