"""Shared domain types: Hurst parameter, time grids, grid paths and the
RNG stream contract."""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from fbmdensity.inputChecks import hurstCheck, positiveIntCheck

ROUGH = 'rough'
BROWNIAN = 'brownian'
YOUNG = 'young'


@dataclass(frozen=True)
class Hurst(object):
    """Hurst parameter H in (0, 1).

    Parameters
    ----------
        value : float
            Strictly inside (0, 1).

    Attributes
    ----------
        regime : str
            'rough' for H < 1/2, 'brownian' for H = 1/2 and 'young'
            for H > 1/2.
    """
    value: float

    def __post_init__(self):
        hurstCheck(self.value)
        object.__setattr__(self, 'value', float(self.value))

    @property
    def regime(self):
        if self.value < 0.5:
            return ROUGH
        if self.value > 0.5:
            return YOUNG
        return BROWNIAN

    def __float__(self):
        return self.value


def as_hurst(H):
    """Accept a float or a Hurst and return a Hurst."""
    if isinstance(H, Hurst):
        return H
    return Hurst(H)


@dataclass(frozen=True)
class TimeGrid(object):
    """Uniform partition t_k = k/n of [0, 1]."""
    n: int

    def __post_init__(self):
        positiveIntCheck(self.n, 'n')

    @property
    def nodes(self):
        return np.arange(self.n + 1) / self.n

    @property
    def dt(self):
        return 1.0 / self.n

    def __len__(self):
        return self.n + 1


def make_grid(n):
    """Uniform grid with n + 1 nodes on [0, 1].

    Parameters
    ----------
        n : int
            Number of steps, n >= 1.

    Returns
    -------
    grid : TimeGrid
    """
    return TimeGrid(n)


@dataclass(frozen=True)
class Path(object):
    """Grid samples of an R^m valued path.

    ``values`` has one row per grid node and is stored read-only.
    """
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != len(self.grid):
            raise ValueError(
                'Path values must have {0} rows (one per grid node); got '
                'shape {1}.'.format(len(self.grid), values.shape))
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def start(self):
        return self.values[0]

    @property
    def end(self):
        return self.values[-1]

    def scalar(self):
        """Values of a one dimensional path as a flat array."""
        if self.dim != 1:
            raise ValueError('Expected a scalar path; this path has '
                             'dimension {0}.'.format(self.dim))
        return self.values[:, 0]

    def increments(self):
        return np.diff(self.values, axis=0)

    def to_frame(self):
        frame = pd.DataFrame(self.values, columns=[
            'comp_{0}'.format(i + 1) for i in range(self.dim)])
        frame.insert(0, 't', self.grid.nodes)
        return frame

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func`` (vectorized over time) at the grid nodes."""
        return cls(grid, func(grid.nodes))

    @classmethod
    def zeros(cls, grid, dim=1):
        return cls(grid, np.zeros((len(grid), dim)))


def rng_stream(seed, *stream):
    """Random generator for the stream (seed, stream...).

    Identical keys give bit-identical draws on one platform; distinct keys
    give statistically independent streams.
    """
    key = [int(seed)] + [int(s) for s in stream]
    return np.random.default_rng(np.random.SeedSequence(key))
