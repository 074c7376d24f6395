"""Deterministic Malliavin covariance matrices of the Ito map endpoint and
the nondegeneracy scan over Cameron-Martin balls."""
import functools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import integrate

from fbmdensity.cameronMartin import cm_norm
from fbmdensity.core import Path, as_hurst, make_grid, rng_stream
from fbmdensity.inputChecks import countCheck, pointCheck
from fbmdensity.parallel import pool_map
from fbmdensity.sde import ito_map

logger = logging.getLogger(__name__)

DOUBLE_INTEGRAL = 'double-integral'
L2_LOWER_BOUND = 'l2-lower-bound'
SCAN_COLUMNS = ['iter', 'h_norm', 'det', 'regime', 'converged']


@dataclass(frozen=True)
class GammaMatrix(object):
    """Malliavin covariance of Phi_1(x; h). For H <= 1/2 the matrix is the
    L2 Gram of the derivative kernel, a lower-bound surrogate."""
    matrix: np.ndarray = field(repr=False)
    H: float
    regime: str
    det: float

    @property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class ScanResult(object):
    det_min: float
    det_max: float
    excluded: int
    table: pd.DataFrame = field(repr=False)


def dphi_kernel(result, V):
    """Derivative kernel s -> J_1 J_s^-1 V(Phi_s), shape (n+1, N, d)."""
    if result.jacobian is None:
        raise ValueError('The solve result carries no Jacobians; solve with '
                         'jacobian=True.')
    states = result.state.values
    return np.einsum('ij,sjk,skd->sid', result.jacobian[-1],
                     result.jacobian_inv, V.eval(states))


def _finish(matrix, H, regime):
    matrix = 0.5 * (matrix + matrix.T)
    return GammaMatrix(matrix, H, regime, float(np.linalg.det(matrix)))


def cell_pair_weights(n, H):
    """Exact integrals of |t - s|^(2H-2) over pairs of grid cells,
    a Toeplitz matrix in the cell offset."""
    beta = 2.0 * H
    h = 1.0 / n
    m = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    return h ** beta / (beta * (beta - 1)) * (
        (m + 1) ** beta - 2 * m ** beta + np.abs(m - 1) ** beta)


def gamma_young(result, V, H):
    """Gamma = C_H sum_a int int k_a(s) k_a(t)* |t - s|^(2H-2) ds dt,
    C_H = H (2H - 1), with k the derivative kernel taken at cell midpoints
    and the singular weight integrated exactly per cell pair (H > 1/2)."""
    H = float(as_hurst(H))
    if H <= 0.5:
        raise ValueError('gamma_young needs H > 1/2; got H={0}.'.format(H))
    kernel = dphi_kernel(result, V)
    mids = 0.5 * (kernel[:-1] + kernel[1:])
    weights = cell_pair_weights(len(mids), H)
    matrix = H * (2 * H - 1) * np.einsum('jid,jl,lkd->ik', mids, weights,
                                         mids)
    return _finish(matrix, H, DOUBLE_INTEGRAL)


def gamma_l2_bound(result, V, H):
    """int_0^1 k(t) k(t)* dt by the trapezoid rule (H <= 1/2), reported
    with the embedding constant set to 1."""
    H = float(as_hurst(H))
    if H > 0.5:
        raise ValueError('gamma_l2_bound needs H <= 1/2; got H={0}.'.format(
            H))
    kernel = dphi_kernel(result, V)
    outer = np.einsum('sid,skd->sik', kernel, kernel)
    matrix = integrate.trapezoid(outer, dx=result.state.grid.dt, axis=0)
    return _finish(matrix, H, L2_LOWER_BOUND)


def gamma_matrix(result, V, H):
    """Dispatch on the Hurst regime."""
    if float(as_hurst(H)) > 0.5:
        return gamma_young(result, V, H)
    return gamma_l2_bound(result, V, H)


def random_smooth_path(grid, d, rng, terms=8):
    """h(t) = sum_k a_k sin((k - 1/2) pi t) with a_k ~ N(0, 1) / k, per
    component; h(0) = 0."""
    k = np.arange(1, terms + 1)
    coeffs = rng.standard_normal((terms, d)) / k[:, None]
    basis = np.sin(np.outer(grid.nodes, (k - 0.5) * np.pi))
    return Path(grid, basis @ coeffs)


def _scan_iteration(index, x, V, H, M, grid, seed):
    rng = rng_stream(seed, 11, index)
    h = random_smooth_path(grid, V.d, rng)
    target = rng.uniform() * M
    norm = cm_norm(h, H).value
    if norm > 0:
        h = Path(grid, h.values * (target / norm))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        result = ito_map(x, h, V)
    gamma = gamma_matrix(result, V, H)
    converged = bool(np.isfinite(gamma.det)
                     and result.jacobian_defect() <= 1e-6)
    return {'iter': index, 'h_norm': cm_norm(h, H).value, 'det': gamma.det,
            'regime': gamma.regime, 'converged': converged}


def nondegeneracy_scan(x, V, H, M, count, seed, grid=None, threads=1):
    """Extremal det Gamma over random paths with Cameron-Martin norm
    u M, u uniform in [0, 1].

    Returns
    -------
    ScanResult
        det_min and det_max over converged iterations; the table has the
        columns iter, h_norm, det, regime, converged.
    """
    countCheck(count)
    if count == 0:
        raise ValueError('nondegeneracy_scan needs count >= 1; the scan is '
                         'empty.')
    if not M > 0:
        raise ValueError('M must be positive; got {0}.'.format(M))
    H = float(as_hurst(H))
    x = pointCheck(x, V.N)
    grid = grid or make_grid(128)
    worker = functools.partial(_scan_iteration, x=x, V=V, H=H, M=M,
                               grid=grid, seed=seed)
    table = pd.DataFrame(pool_map(worker, range(count), threads),
                         columns=SCAN_COLUMNS)
    good = table[table['converged']]
    excluded = int(len(table) - len(good))
    if excluded:
        warnings.warn('{0} of {1} scan iterations were excluded.'.format(
            excluded, count))
    if len(good) == 0:
        return ScanResult(float('nan'), float('nan'), excluded, table)
    logger.info('scan over %d paths: det in [%.6g, %.6g]', len(good),
                good['det'].min(), good['det'].max())
    return ScanResult(float(good['det'].min()), float(good['det'].max()),
                      excluded, table)
