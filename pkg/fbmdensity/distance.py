"""Control distance d(x, y): the explicit connecting path, its
Cameron-Martin norm as an upper bound, penalty optimization of the norm
under the endpoint constraint, and radius sweeps."""
import functools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import integrate, linalg, optimize

from fbmdensity.cameronMartin import cm_norm
from fbmdensity.core import Path, as_hurst, make_grid, rng_stream
from fbmdensity.exceptions import EllipticityError
from fbmdensity.fbm import gram
from fbmdensity.inputChecks import pointCheck, radiiCheck
from fbmdensity.parallel import pool_map
from fbmdensity.sde import ODE_RK4, integrate_increments

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['r', 'dir_index', 'upper', 'optimized', 'residual',
                 'ratio', 'converged']
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class OptimizeOptions(object):
    """Settings of the penalty method."""
    rho_ladder: tuple = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7)
    gtol: float = 1e-6
    maxiter: int = 500
    tol: float = 1e-4
    fd_step: float = 1e-6


@dataclass(frozen=True)
class DistanceResult(object):
    """Optimized control distance with its certificates."""
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    upper_bound: float
    optimized: float
    endpoint_residual: float
    ratio: float
    grid_n: int
    H: float
    converged: bool = True
    iterations: int = 0
    path: Path = field(repr=False, default=None)


def connecting_path(x, y, V, grid):
    """Cameron-Martin path steering x to y along the straight segment,

        h_t = int_0^t V*(z_s) (V(z_s) V*(z_s))^-1 (y - x) ds,
        z_s = x + s (y - x),

    integrated with the cumulative trapezoid rule.

    Raises
    ------
    EllipticityError
        When V V* is numerically singular on the segment.
    """
    x = pointCheck(x, V.N, 'x')
    y = pointCheck(y, V.N, 'y')
    nodes = grid.nodes
    z = x[None, :] + nodes[:, None] * (y - x)[None, :]
    v = V.eval(z)
    G = v @ np.swapaxes(v, -1, -2)
    condition = np.linalg.cond(G)
    if np.any(~np.isfinite(condition)) or condition.max() > CONDITION_LIMIT:
        raise EllipticityError(
            'V V* is numerically singular on the segment from {0} to {1} '
            '(condition number {2:.3g}).'.format(x.tolist(), y.tolist(),
                                                 float(np.max(condition))))
    rhs = np.broadcast_to(y - x, (len(nodes), V.N))[..., None]
    solved = np.linalg.solve(G, rhs)
    integrand = (np.swapaxes(v, -1, -2) @ solved)[..., 0]
    values = integrate.cumulative_trapezoid(integrand, dx=grid.dt, axis=0,
                                            initial=0)
    return Path(grid, values)


def distance_upper(x, y, V, grid, H):
    """Cameron-Martin norm of the connecting path, an upper bound for
    d(x, y)."""
    return cm_norm(connecting_path(x, y, V, grid), H).value


def _endpoints(x, z, chol, V):
    """Ito map endpoints for whitened coordinates z of shape (b, n, d)."""
    h = np.einsum('ij,bjc->bic', chol, z)
    increments = np.diff(h, axis=1, prepend=0.0)
    states = integrate_increments(x, increments, V, ODE_RK4,
                                  jacobian=False)[0]
    return states[:, -1, :]


def _penalty(zflat, x, y, chol, V, rho, step, shape):
    """Penalized objective |z|^2 + rho |Phi_1 - y|^2 and its gradient,
    central differences along each coordinate of z."""
    z = zflat.reshape(shape)
    size = zflat.size
    bumps = (np.eye(size) * step).reshape((size,) + shape)
    batch = np.concatenate([z + bumps, z - bumps, z[None]], axis=0)
    miss = _endpoints(x, batch, chol, V) - y
    square = np.sum(miss ** 2, axis=1)
    value = float(np.sum(zflat ** 2) + rho * square[-1])
    grad = 2 * zflat + rho * (square[:size] - square[size:2 * size]) \
        / (2 * step)
    return value, grad


def distance_optimize(x, y, V, grid, H, opts=None):
    """Minimize the Cameron-Martin norm over grid paths h with
    Phi_1(x; h) = y.

    The path is written as h = L z per component (L the Gram factor), so
    the norm is |z|. The quadratic penalty rho |Phi_1(x; h) - y|^2 is
    escalated along ``opts.rho_ladder``, each stage an L-BFGS-B run warm
    started from the previous one; the first starts from the connecting
    path.

    Parameters
    ----------
        x, y : array_like
            Points of R^N with |x - y| <= 1.
        V : VectorFieldSet
        grid : TimeGrid
        H : float or Hurst
        opts : OptimizeOptions, optional

    Returns
    -------
    DistanceResult
        ``converged`` is False when the endpoint residual stays above
        ``opts.tol``.
    """
    opts = opts or OptimizeOptions()
    H = float(as_hurst(H))
    x = pointCheck(x, V.N, 'x')
    y = pointCheck(y, V.N, 'y')
    gap = float(np.linalg.norm(y - x))
    if gap > 1:
        raise ValueError('distance_optimize is local: |x - y| must be <= 1; '
                         'got {0:.6g}.'.format(gap))
    if gap == 0:
        return DistanceResult(x, y, 0.0, 0.0, 0.0, float('nan'), grid.n, H,
                              True, 0, Path.zeros(grid, V.d))
    start = connecting_path(x, y, V, grid)
    upper = cm_norm(start, H).value
    chol = gram(grid, H).chol
    shape = (grid.n, V.d)
    z = linalg.solve_triangular(chol, start.values[1:], lower=True).ravel()
    iterations = 0
    residual = np.inf
    for rho in opts.rho_ladder:
        res = optimize.minimize(
            _penalty, z, jac=True, method='L-BFGS-B',
            args=(x, y, chol, V, rho, opts.fd_step, shape),
            options={'gtol': opts.gtol, 'maxiter': opts.maxiter})
        z = res.x
        iterations += int(res.nit)
        residual = float(np.linalg.norm(
            _endpoints(x, z.reshape((1,) + shape), chol, V)[0] - y))
        logger.debug('rho=%g: |z|=%.8f residual=%.3g nit=%d', rho,
                     np.linalg.norm(z), residual, res.nit)
        if residual < 1e-2 * opts.tol:
            break
    optimized = float(np.linalg.norm(z))
    values = np.zeros((grid.n + 1, V.d))
    values[1:] = chol @ z.reshape(shape)
    converged = residual <= opts.tol
    if not converged:
        warnings.warn('Distance optimization from {0} to {1} did not reach '
                      'the endpoint tolerance: residual {2:.3g}.'.format(
                          x.tolist(), y.tolist(), residual))
    return DistanceResult(x, y, upper, optimized, residual, optimized / gap,
                          grid.n, H, converged, iterations,
                          Path(grid, values))


def scalar_distance_oracle(x, y, V):
    """|int_x^y dv / V(v)| for N = d = 1, the exact control distance of a
    scalar equation."""
    if V.N != 1 or V.d != 1:
        raise ValueError('The scalar oracle needs N = d = 1; got N={0}, '
                         'd={1}.'.format(V.N, V.d))
    x = float(np.ravel(x)[0])
    y = float(np.ravel(y)[0])
    value, _ = integrate.quad(lambda v: 1.0 / V.eval([v])[0, 0], x, y,
                              epsabs=1e-13, epsrel=1e-12)
    return abs(value)


def unit_directions(N, k, seed=0):
    """k deterministic unit vectors in R^N: the signed coordinate axes
    first, then normalized Gaussian draws from the stream (seed, 7)."""
    if k < 1:
        raise ValueError('directions must be >= 1; got {0}.'.format(k))
    axes = []
    for i in range(N):
        for sign in (1.0, -1.0):
            e = np.zeros(N)
            e[i] = sign
            axes.append(e)
    out = axes[:k]
    if k > len(out):
        extra = rng_stream(seed, 7).standard_normal((k - len(out), N))
        out.extend(extra / np.linalg.norm(extra, axis=1, keepdims=True))
    return np.array(out)


def _sweep_cell(cell, x, V, grid, H, opts):
    r, dir_index, u = cell
    result = distance_optimize(x, x + r * u, V, grid, H, opts)
    return {'r': r, 'dir_index': dir_index, 'upper': result.upper_bound,
            'optimized': result.optimized,
            'residual': result.endpoint_residual, 'ratio': result.ratio,
            'converged': result.converged}


def comparison_sweep(x, radii, directions, V, H, grid=None, opts=None,
                     threads=1, seed=0):
    """Optimized distance from x to x + r u over radii and directions.

    Parameters
    ----------
        directions : int or array_like
            A count (see ``unit_directions``) or unit vectors, shape (k, N).

    Returns
    -------
    pandas.DataFrame
        Columns r, dir_index, upper, optimized, residual, ratio,
        converged, ordered by (radius, direction). ``attrs`` holds
        min_ratio, max_ratio and the fitted constant C with
        1/C <= ratio <= C.
    """
    x = pointCheck(x, V.N, 'x')
    radii = radiiCheck(radii)
    grid = grid or make_grid(64)
    if np.isscalar(directions):
        directions = unit_directions(V.N, int(directions), seed)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=1,
                                             keepdims=True)
    cells = [(float(r), i, u) for r in radii
             for i, u in enumerate(directions)]
    worker = functools.partial(_sweep_cell, x=x, V=V, grid=grid,
                               H=float(as_hurst(H)), opts=opts)
    rows = pool_map(worker, cells, threads)
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    if len(table):
        low, high = table['ratio'].min(), table['ratio'].max()
        table.attrs['min_ratio'] = float(low)
        table.attrs['max_ratio'] = float(high)
        table.attrs['C'] = float(max(high, 1.0 / low))
        logger.info('sweep over %d cells: ratio in [%.4f, %.4f]',
                    len(table), low, high)
    return table


def asymmetry_report(x, y, V, grid, H, opts=None):
    """d(x, y) and d(y, x) side by side. Symmetry is not expected."""
    rows = []
    for label, a, b in (('x->y', x, y), ('y->x', y, x)):
        result = distance_optimize(a, b, V, grid, H, opts)
        rows.append({'direction': label, 'upper': result.upper_bound,
                     'optimized': result.optimized,
                     'residual': result.endpoint_residual,
                     'converged': result.converged})
    table = pd.DataFrame(rows)
    table.attrs['difference'] = float(table['optimized'].iloc[0]
                                      - table['optimized'].iloc[1])
    return table
