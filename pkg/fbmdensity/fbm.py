"""Fractional Brownian motion: covariance, Gram factorizations, the discrete
Volterra kernel and exact-covariance sampling."""
import functools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.stats import norm

from fbmdensity.core import Path, TimeGrid, as_hurst, rng_stream
from fbmdensity.exceptions import FactorizationError
from fbmdensity.inputChecks import countCheck, positiveIntCheck
from fbmdensity.parallel import pool_map

logger = logging.getLogger(__name__)

JITTER_LADDER = (0.0, 1e-12, 1e-10)
DEFAULT_BATCH = 10000


def cov(s, t, H):
    """fBm covariance R(s, t) = (s^2H + t^2H - |s - t|^2H) / 2.

    Parameters
    ----------
        s, t : float or array_like
            Times in [0, 1]; broadcast against each other.
        H : float or Hurst

    Returns
    -------
    float or numpy.ndarray
    """
    two_h = 2.0 * float(as_hurst(H))
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = 0.5 * (s ** two_h + t ** two_h - np.abs(s - t) ** two_h)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class CovGram(object):
    """Gram matrix R(t_i, t_j) over positive times with its lower Cholesky
    factor. ``grid`` is None for Grams built on arbitrary times."""
    times: np.ndarray = field(repr=False)
    H: object
    matrix: np.ndarray = field(repr=False)
    chol: np.ndarray = field(repr=False)
    jitter_used: float = 0.0
    grid: TimeGrid = None

    @property
    def size(self):
        return self.matrix.shape[0]


def _factorize(matrix):
    """Cholesky with the jitter ladder; returns (L, jitter)."""
    eye = np.eye(matrix.shape[0])
    for jitter in JITTER_LADDER:
        try:
            chol = linalg.cholesky(matrix + jitter * eye, lower=True)
        except linalg.LinAlgError:
            logger.debug('Cholesky failed with jitter %g', jitter)
            continue
        if jitter > 0:
            warnings.warn('Gram matrix of size {0} needed jitter {1:g} to '
                          'factorize.'.format(matrix.shape[0], jitter))
        return chol, jitter
    raise FactorizationError(
        'Gram matrix of size {0} is not positive definite even with jitter '
        '{1:g}; the grid is too fine for this Hurst parameter.'.format(
            matrix.shape[0], JITTER_LADDER[-1]))


def _build(times, H, grid=None):
    times = np.array(times, dtype=float)
    matrix = cov(times[:, None], times[None, :], H)
    matrix = 0.5 * (matrix + matrix.T)
    chol, jitter = _factorize(matrix)
    for array in (times, matrix, chol):
        array.setflags(write=False)
    return CovGram(times, as_hurst(H), matrix, chol, jitter, grid)


@functools.lru_cache(maxsize=64)
def _gram_cached(n, H):
    logger.debug('building Gram for n=%d, H=%g', n, H)
    grid = TimeGrid(n)
    return _build(grid.nodes[1:], H, grid)


def gram(grid, H):
    """Gram over the nodes t_1..t_n of ``grid`` (t_0 = 0 is degenerate).

    Factorizations are cached per (n, H); the arrays are read-only.
    """
    return _gram_cached(grid.n, float(as_hurst(H)))


def gram_at(times, H):
    """Gram over arbitrary strictly increasing positive times."""
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ValueError('times must be positive and strictly increasing.')
    return _build(times, H)


def kernel_matrix(grid, H):
    """Discrete Volterra kernel K(t_i, s_j) ~ L[i, j] / sqrt(dt).

    Lower triangular, so row i only sees noise up to t_i.
    """
    return gram(grid, H).chol / np.sqrt(grid.dt)


def draw_batch(job, chol, d, seed, stream):
    batch, size = job
    rng = rng_stream(seed, stream, batch)
    noise = rng.standard_normal((size, chol.shape[0], d))
    out = np.zeros((size, chol.shape[0] + 1, d))
    out[:, 1:, :] = np.einsum('ij,bjd->bid', chol, noise)
    return out


def batch_jobs(count, batch_size=DEFAULT_BATCH):
    """Split ``count`` into (batch index, size) jobs."""
    countCheck(count)
    positiveIntCheck(batch_size, 'batch_size')
    return [(b, min(batch_size, count - start))
            for b, start in enumerate(range(0, count, batch_size))]


def sample_batches(covgram, d, count, seed, stream=0,
                   batch_size=DEFAULT_BATCH, threads=1):
    """Sampled paths over ``covgram`` times with B_0 = 0 prepended, one
    array of shape (size, len(times) + 1, d) per batch."""
    positiveIntCheck(d, 'd')
    worker = functools.partial(draw_batch, chol=covgram.chol, d=d,
                               seed=seed, stream=stream)
    return pool_map(worker, batch_jobs(count, batch_size), threads)


def sample_array(grid, H, d, count, seed, stream=0,
                 batch_size=DEFAULT_BATCH, threads=1):
    """``count`` discrete fBm paths as an array of shape (count, n+1, d).

    Batch b draws from the stream (seed, stream, b), so the result does
    not depend on ``threads``.
    """
    batches = sample_batches(gram(grid, H), d, count, seed, stream,
                             batch_size, threads)
    if not batches:
        return np.zeros((0, grid.n + 1, d))
    return np.concatenate(batches, axis=0)


def sample_paths(grid, H, d, count, seed, stream=0,
                 batch_size=DEFAULT_BATCH, threads=1):
    """``count`` i.i.d. d-dimensional discrete fBm paths.

    Parameters
    ----------
        grid : TimeGrid
        H : float or Hurst
        d : int
            Number of independent components.
        count : int
        seed, stream : int
            RNG stream key.

    Returns
    -------
    list of Path
        Each path starts at 0 and has covariance R(t_i, t_j) per
        component.
    """
    array = sample_array(grid, H, d, count, seed, stream, batch_size,
                         threads)
    return [Path(grid, values) for values in array]


def paths_to_frame(paths):
    """Long-format frame of one or several paths.

    A single path gives the columns ``t, comp_1..comp_d``; several paths
    get a leading ``path`` column.
    """
    if isinstance(paths, Path):
        return paths.to_frame()
    paths = list(paths)
    if len(paths) == 1:
        return paths[0].to_frame()
    frames = []
    for index, path in enumerate(paths):
        frame = path.to_frame()
        frame.insert(0, 'path', index)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def family_sigmas(m, base=3.0):
    """Per-entry threshold in standard errors so that m simultaneous checks
    keep the false-alarm rate of a single ``base``-sigma check."""
    if m <= 1:
        return base
    tail = norm.sf(base)
    return float(max(base, norm.isf(tail / m)))


def empirical_covariance_report(samples, grid, H, sigmas=None):
    """Empirical against exact covariance on every node pair (i <= j).

    Parameters
    ----------
        samples : numpy.ndarray
            Shape (count, n+1, d); components are pooled as independent
            draws.
        grid : TimeGrid
        H : float or Hurst
        sigmas : float, optional
            Tolerance in standard errors; the default corrects 3 sigma for
            the number of pairs.

    Returns
    -------
    pandas.DataFrame
        Columns t_i, t_j, exact, empirical, stderr, abs_err, z, within.
    """
    samples = np.asarray(samples, dtype=float)
    flat = np.moveaxis(samples[:, 1:, :], 2, 1).reshape(-1, grid.n)
    m = flat.shape[0]
    if m < 2:
        raise ValueError('The covariance report needs at least 2 samples; '
                         'got {0}.'.format(m))
    i, j = np.triu_indices(grid.n)
    products = flat[:, i] * flat[:, j]
    empirical = products.mean(axis=0)
    stderr = products.std(axis=0, ddof=1) / np.sqrt(m)
    nodes = grid.nodes[1:]
    exact = cov(nodes[i], nodes[j], H)
    abs_err = np.abs(empirical - exact)
    z = abs_err / stderr
    if sigmas is None:
        sigmas = family_sigmas(len(i))
    return pd.DataFrame({'t_i': nodes[i], 't_j': nodes[j], 'exact': exact,
                         'empirical': empirical, 'stderr': stderr,
                         'abs_err': abs_err, 'z': z, 'within': z <= sigmas})
