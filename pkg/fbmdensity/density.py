"""Monte Carlo estimates of the transition density p(t, x, y) through the
scaling identity Phi_t(x; B) = Phi_1(x; t^H B) in law."""
import functools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import norm

from fbmdensity.core import as_hurst, make_grid
from fbmdensity.distance import distance_optimize
from fbmdensity.fbm import (DEFAULT_BATCH, batch_jobs, draw_batch, gram,
                            gram_at)
from fbmdensity.inputChecks import (countCheck, pointCheck, sdeHurstCheck,
                                    timeCheck)
from fbmdensity.parallel import pool_map
from fbmdensity.sde import MILSTEIN, integrate_increments

logger = logging.getLogger(__name__)

MIN_KDE_SAMPLES = 100
KDE_BATCHES = 10
DENSITY_COLUMNS = ['t', 'y_offset', 'phat', 'stderr', 'phat_times_tNH',
                   'bandwidth']
VARADHAN_COLUMNS = ['t', 'phat', 't2H_log_phat', 'limit', 'gap']


@dataclass(frozen=True)
class DensityEstimate(object):
    """Kernel estimate of a density at one point."""
    value: float
    bandwidth: np.ndarray = field(repr=False)
    sample_count: int
    mc_stderr: float
    t: float = None
    x: np.ndarray = field(repr=False, default=None)
    y: np.ndarray = field(repr=False, default=None)
    H: float = None


def _endpoint_batch(job, chol, d, seed, stream, x, V, scale, scheme,
                    drift_scale):
    paths = draw_batch(job, chol, d, seed, stream)
    increments = scale * np.diff(paths, axis=1)
    states = integrate_increments(x, increments, V, scheme, jacobian=False,
                                  drift_scale=drift_scale)[0]
    return states[:, -1, :]


def _solve_batches(covgram, x, V, count, seed, stream, scale, scheme,
                   drift_scale, batch_size, threads):
    if count == 0:
        return np.zeros((0, V.N))
    worker = functools.partial(
        _endpoint_batch, chol=covgram.chol, d=V.d, seed=seed, stream=stream,
        x=x, V=V, scale=scale, scheme=scheme, drift_scale=drift_scale)
    batches = pool_map(worker, batch_jobs(count, batch_size), threads)
    return np.concatenate(batches, axis=0)


def sample_endpoints(t, x, V, H, count, seed, grid=None, stream=0,
                     scheme=MILSTEIN, batch_size=DEFAULT_BATCH, threads=1):
    """Samples of X_t started at x, as Phi_1(x; t^H B) with B a discrete
    fBm on [0, 1].

    A drift V_0 enters with the weight (t^H)^(1/H) = t.

    Returns
    -------
    numpy.ndarray
        Shape (count, N).
    """
    timeCheck(t)
    H = float(as_hurst(H))
    sdeHurstCheck(H)
    countCheck(count)
    x = pointCheck(x, V.N)
    grid = grid or make_grid(128)
    drift_scale = float(t) if V.has_drift else 0.0
    return _solve_batches(gram(grid, H), x, V, count, seed, stream,
                          float(t) ** H, scheme, drift_scale, batch_size,
                          threads)


def sample_endpoints_direct(t, x, V, H, count, seed, grid=None, stream=1,
                            scheme=MILSTEIN, batch_size=DEFAULT_BATCH,
                            threads=1):
    """Samples of X_t simulated on [0, t] itself, from the Gram of the
    times t k / n."""
    timeCheck(t)
    H = float(as_hurst(H))
    sdeHurstCheck(H)
    countCheck(count)
    x = pointCheck(x, V.N)
    grid = grid or make_grid(128)
    covgram = gram_at(float(t) * grid.nodes[1:], H)
    drift_scale = float(t) if V.has_drift else 0.0
    return _solve_batches(covgram, x, V, count, seed, stream, 1.0, scheme,
                          drift_scale, batch_size, threads)


def scaling_check(t, x, V, H, count, seed, grid=None, sigmas=3.0,
                  threads=1):
    """Compare means and covariances of the scaled and direct formulations.

    Returns
    -------
    pandas.DataFrame
        One row per mean component and covariance entry: quantity, scaled,
        direct, diff, stderr, z, within.
    """
    scaled = sample_endpoints(t, x, V, H, count, seed, grid, stream=0,
                              threads=threads)
    direct = sample_endpoints_direct(t, x, V, H, count, seed, grid,
                                     stream=1, threads=threads)
    m = len(scaled)
    rows = []
    for i in range(V.N):
        a, b = scaled[:, i], direct[:, i]
        se = np.sqrt(a.var(ddof=1) / m + b.var(ddof=1) / m)
        rows.append(('mean_{0}'.format(i + 1), a.mean(), b.mean(), se))
    ca = scaled - scaled.mean(axis=0)
    cb = direct - direct.mean(axis=0)
    for i in range(V.N):
        for j in range(i, V.N):
            pa, pb = ca[:, i] * ca[:, j], cb[:, i] * cb[:, j]
            se = np.sqrt(pa.var(ddof=1) / m + pb.var(ddof=1) / m)
            rows.append(('cov_{0}{1}'.format(i + 1, j + 1), pa.mean(),
                         pb.mean(), se))
    table = pd.DataFrame(rows, columns=['quantity', 'scaled', 'direct',
                                        'stderr'])
    table['diff'] = table['scaled'] - table['direct']
    table['z'] = table['diff'].abs() / table['stderr']
    table['within'] = table['z'] <= sigmas
    return table[['quantity', 'scaled', 'direct', 'diff', 'stderr', 'z',
                  'within']]


def silverman_bandwidth(samples):
    """Per-dimension (4 / (N + 2))^(1/(N+4)) sd count^(-1/(N+4))."""
    count, N = samples.shape
    std = samples.std(axis=0, ddof=1)
    return (4.0 / (N + 2)) ** (1.0 / (N + 4)) * std \
        * count ** (-1.0 / (N + 4))


def kde_at(samples, y, batches=KDE_BATCHES, t=None, x=None, H=None):
    """Product-Gaussian kernel density estimate at y with Silverman
    bandwidths; the standard error comes from batch means. The time, start
    point and Hurst index of the sampled endpoints are recorded on the
    estimate when given.

    Raises
    ------
    ValueError
        For fewer than 100 samples or a dimension with zero variance.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    count, N = samples.shape
    if count < MIN_KDE_SAMPLES:
        raise ValueError('kde_at needs at least {0} samples; got {1}.'.format(
            MIN_KDE_SAMPLES, count))
    y = pointCheck(y, N, 'y')
    bandwidth = silverman_bandwidth(samples)
    if np.any(bandwidth <= 0):
        raise ValueError('Degenerate samples: zero variance in dimension(s) '
                         '{0}.'.format((np.flatnonzero(bandwidth <= 0)
                                        + 1).tolist()))
    contributions = np.prod(norm.pdf((y - samples) / bandwidth) / bandwidth,
                            axis=1)
    means = np.array([part.mean() for part in
                      np.array_split(contributions, batches)])
    stderr = float(means.std(ddof=1) / np.sqrt(batches))
    if x is not None:
        x = pointCheck(x, N, 'x')
    return DensityEstimate(float(contributions.mean()), bandwidth, count,
                           stderr, None if t is None else float(t), x, y,
                           None if H is None else float(H))


def gaussian_density(y, mean, var):
    """Product Gaussian density with per-component variance ``var``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mean = np.broadcast_to(np.asarray(mean, dtype=float), y.shape)
    sd = np.sqrt(np.broadcast_to(np.asarray(var, dtype=float), y.shape))
    return float(np.prod(norm.pdf(y, loc=mean, scale=sd)))


def lower_bound_check(x, u, V, H, t_list, count, seed, grid=None,
                      threads=1):
    """Estimate p(t, x, x + t^H u) t^(NH) over ``t_list``.

    Returns
    -------
    pandas.DataFrame
        Columns t, y_offset, phat, stderr, phat_times_tNH, bandwidth
        (geometric mean over dimensions). ``attrs['passed']`` is True when
        min(phat t^NH - 3 stderr t^NH) > 0 and last / first >= 0.5.
    """
    H = float(as_hurst(H))
    x = pointCheck(x, V.N, 'x')
    u = pointCheck(u, V.N, 'u')
    u = u / np.linalg.norm(u)
    rows = []
    for index, t in enumerate(t_list):
        samples = sample_endpoints(t, x, V, H, count, seed, grid,
                                   stream=index, threads=threads)
        offset = float(t) ** H
        estimate = kde_at(samples, x + offset * u, t=t, x=x, H=H)
        scale = float(t) ** (V.N * H)
        rows.append({'t': float(t), 'y_offset': offset,
                     'phat': estimate.value, 'stderr': estimate.mc_stderr,
                     'phat_times_tNH': estimate.value * scale,
                     'bandwidth': float(np.exp(np.mean(np.log(
                         estimate.bandwidth))))})
        logger.info('t=%g: phat=%.6g +- %.2g', t, estimate.value,
                    estimate.mc_stderr)
    table = pd.DataFrame(rows, columns=DENSITY_COLUMNS)
    if len(table):
        scaled_se = table['stderr'] * table['t'] ** (V.N * H)
        lower = float((table['phat_times_tNH'] - 3 * scaled_se).min())
        first = table['phat_times_tNH'].iloc[0]
        last_first = float(table['phat_times_tNH'].iloc[-1] / first)
        table.attrs.update({'min_lower': lower, 'last_first': last_first,
                            'passed': bool(lower > 0 and last_first >= 0.5)})
    return table


def varadhan_diagnostic(x, y, V, H, t_list, count, seed, grid=None,
                        distance_grid=None, opts=None, threads=1):
    """t^2H log p(t, x, y) against -d(x, y)^2 / 2 with d the optimized
    control distance. Diagnostic only; cells with phat <= 0 are NaN."""
    H = float(as_hurst(H))
    x = pointCheck(x, V.N, 'x')
    y = pointCheck(y, V.N, 'y')
    distance = distance_optimize(x, y, V, distance_grid or make_grid(32), H,
                                 opts).optimized
    limit = -0.5 * distance ** 2
    rows = []
    for index, t in enumerate(t_list):
        samples = sample_endpoints(t, x, V, H, count, seed, grid,
                                   stream=100 + index, threads=threads)
        phat = kde_at(samples, y, t=t, x=x, H=H).value
        if phat > 0:
            value = float(t) ** (2 * H) * np.log(phat)
        else:
            warnings.warn('Density estimate at t={0} is zero; the Varadhan '
                          'cell is missing.'.format(t))
            value = float('nan')
        rows.append({'t': float(t), 'phat': phat, 't2H_log_phat': value,
                     'limit': limit, 'gap': value - limit})
    table = pd.DataFrame(rows, columns=VARADHAN_COLUMNS)
    table.attrs['distance'] = distance
    return table
