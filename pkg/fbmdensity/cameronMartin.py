"""Cameron-Martin space of fBm: the Volterra operator K, its adjoint form
K*, Cameron-Martin norms and related path norms."""
import functools
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import linalg, special

from fbmdensity import fracCalc
from fbmdensity.core import Path, as_hurst, make_grid
from fbmdensity.exceptions import CapabilityError
from fbmdensity.fbm import cov, gram
from fbmdensity.inputChecks import originCheck, sameGridCheck

logger = logging.getLogger(__name__)

GRID_RKHS = 'grid-rkhs'
K_INVERSE = 'k-inverse'

# Gauss-Jacobi points for the inner integrals of the K inverse
JACOBI_POINTS = 48


@dataclass(frozen=True)
class CMNormResult(object):
    """Cameron-Martin norm of a grid path."""
    value: float
    grid_n: int
    method: str
    H: float = None


def _is_brownian(H):
    return abs(H - 0.5) < 1e-12


def kernel_constant(H):
    """Normalising constant of K (and of K* for H > 1/2),

        C_H = (pi H (1 - 2H) / (Gamma(2 - 2H) cos(pi H)))^(1/2),

    equal to 1 at H = 1/2.
    """
    H = float(as_hurst(H))
    if _is_brownian(H):
        return 1.0
    return float(np.sqrt(np.pi * H * (1 - 2 * H)
                         / (special.gamma(2 - 2 * H) * np.cos(np.pi * H))))


def kernel_constant_star(H):
    """Constant c_H Gamma(H + 1/2) of the derivative form of K* (H < 1/2),
    c_H = (2H / ((1 - 2H) B(1 - 2H, H + 1/2)))^(1/2)."""
    H = float(as_hurst(H))
    if _is_brownian(H):
        return 1.0
    if H > 0.5:
        return kernel_constant(H)
    c = np.sqrt(2 * H / ((1 - 2 * H) * special.beta(1 - 2 * H, H + 0.5)))
    return float(c * special.gamma(H + 0.5))


def _k_raw(values, n, H):
    """K without its constant, on node values (axis 0)."""
    if _is_brownian(H):
        return fracCalc.apply_left(fracCalc.int_weights(n, 1.0), values)
    a = abs(H - 0.5)
    inner = fracCalc.apply_left(
        fracCalc.weighted_int_weights(n, a, -a), values)
    nodes = np.arange(n + 1) / n
    power = nodes ** a
    middle = power.reshape((-1,) + (1,) * (inner.ndim - 1)) * inner
    outer = 1.0 if H > 0.5 else 2 * H
    return fracCalc.apply_left(fracCalc.int_weights(n, outer), middle)


@functools.lru_cache(maxsize=32)
def calibrate_constant(H, n=256):
    """Least-squares constant matching the discrete K to the Cholesky
    factor of the Gram, sqrt(dt) L phi, over a few smooth test functions.
    """
    H = float(as_hurst(H))
    grid = make_grid(n)
    nodes = grid.nodes
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    tests = (np.ones_like, lambda s: s, lambda s: np.cos(np.pi * s))
    raw = np.column_stack([_k_raw(f(nodes), n, H)[1:] for f in tests])
    chol = gram(grid, H).chol
    oracle = np.sqrt(grid.dt) * chol @ np.column_stack([f(mids)
                                                        for f in tests])
    fitted = float(np.sum(raw * oracle) / np.sum(raw * raw))
    logger.info('fitted kernel constant %.6f at H=%g (closed form %.6f)',
                fitted, H, kernel_constant(H))
    return fitted


def resolve_constant(H, constant='analytic'):
    """The constant of K: 'analytic', 'fitted' or an explicit number."""
    if constant == 'analytic':
        return kernel_constant(H)
    if constant == 'fitted':
        return calibrate_constant(float(H))
    try:
        return float(constant)
    except (TypeError, ValueError):
        raise ValueError("constant must be 'analytic', 'fitted' or a "
                         "number; got {0!r}.".format(constant))


def operator_K(phi, H, constant='analytic'):
    """Apply K to a scalar grid function.

    H > 1/2: C I^1( t^(H-1/2) I^(H-1/2)( s^(1/2-H) phi ) ).
    H <= 1/2: C I^(2H)( t^(1/2-H) I^(1/2-H)( s^(H-1/2) phi ) ).

    Parameters
    ----------
        phi : Path
        H : float or Hurst
        constant : {'analytic', 'fitted'} or float, optional

    Returns
    -------
    Path
        K phi, vanishing at t = 0.
    """
    H = float(as_hurst(H))
    values = phi.scalar()
    c = resolve_constant(H, constant)
    return Path(phi.grid, c * _k_raw(values, phi.grid.n, H))


def operator_Kstar(f, H, constant='analytic'):
    """Apply K* to a scalar grid function.

    H > 1/2: C t^(1/2-H) I_{1-}^(H-1/2)( s^(H-1/2) f ).
    H < 1/2: C* t^(1/2-H) D_{1-}^(1/2-H)( s^(H-1/2) f ).
    The identity at H = 1/2. Values at t_0 (singular weight) and, in the
    derivative branch, at t_n are NaN.
    """
    H = float(as_hurst(H))
    if _is_brownian(H):
        return f
    grid = f.grid
    nodes = grid.nodes
    a = abs(H - 0.5)
    weighted = np.empty(len(nodes))
    weighted[1:] = nodes[1:] ** (H - 0.5) * f.scalar()[1:]
    weighted[0] = 0.0 if H > 0.5 else f.scalar()[0]
    if H > 0.5:
        c = resolve_constant(H, constant)
        inner = fracCalc.apply_right(fracCalc.int_weights(grid.n, a),
                                     weighted)
    else:
        c = kernel_constant_star(H)
        if constant != 'analytic':
            c *= resolve_constant(H, constant) / kernel_constant(H)
        inner = fracCalc.apply_right(fracCalc.deriv_weights(grid.n, a),
                                     weighted)
    out = np.full(len(nodes), np.nan)
    out[1:] = c * nodes[1:] ** (0.5 - H) * inner[1:]
    return Path(grid, out)


def representer(grid, H, c):
    """The path cov(., 1, H) c, representer of evaluation at t = 1."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return Path(grid, cov(grid.nodes, 1.0, H)[:, None] * c[None, :])


def cm_norm(h, H, method=GRID_RKHS):
    """Cameron-Martin norm of a grid path.

    The grid-rkhs method evaluates the quadratic form h* R^-1 h over the
    nodes t_1..t_n, summing components in quadrature; it increases to the
    continuum norm as the grid is refined.

    Returns
    -------
    CMNormResult
    """
    if method == K_INVERSE:
        return cm_norm_kinv(h, H)
    if method != GRID_RKHS:
        raise ValueError('method must be {0!r} or {1!r}; got {2!r}.'.format(
            GRID_RKHS, K_INVERSE, method))
    originCheck(h)
    H = float(as_hurst(H))
    covgram = gram(h.grid, H)
    values = h.values[1:]
    solved = linalg.cho_solve((covgram.chol, True), values)
    square = max(float(np.sum(values * solved)), 0.0)
    return CMNormResult(np.sqrt(square), h.grid.n, GRID_RKHS, H)


def cm_norm_many(values, grid, H):
    """Grid RKHS norms of many paths; ``values`` has shape (count, n+1, d)."""
    covgram = gram(grid, H)
    values = np.asarray(values, dtype=float)[:, 1:, :]
    count, n, d = values.shape
    stacked = np.moveaxis(values, 0, 1).reshape(n, count * d)
    solved = linalg.cho_solve((covgram.chol, True), stacked)
    square = np.sum((stacked * solved).reshape(n, count, d), axis=(0, 2))
    return np.sqrt(np.maximum(square, 0.0))


def kinv(h, H, points=JACOBI_POINTS):
    """K^-1 h for H > 1/2 on the grid, returned as a Path.

    Uses K^-1 h = t^(1/2-H) psi(t) with

        psi(t) = [(2-2H) int_0^1 w(u) h'(tu) du
                  + t int_0^1 w(u) u h''(tu) du] / (C Gamma(3/2-H)),

    w(u) = (u(1-u))^(1/2-H), the u-integrals by Gauss-Jacobi quadrature
    and h', h'' by second-order finite differences. NaN at t_0.
    """
    psi = _kinv_psi(h.scalar(), h.grid, float(as_hurst(H)), points)
    nodes = h.grid.nodes
    out = np.full(len(nodes), np.nan)
    out[1:] = nodes[1:] ** (0.5 - float(H)) * psi[1:]
    return Path(h.grid, out)


def _kinv_psi(values, grid, H, points):
    a = H - 0.5
    nodes = grid.nodes
    first = np.gradient(values, grid.dt, edge_order=2)
    second = np.gradient(first, grid.dt, edge_order=2)
    x, w = special.roots_jacobi(points, -a, -a)
    u = 0.5 * (1.0 + x)
    w = w * 2.0 ** (2 * a - 1)
    tu = nodes[:, None] * u[None, :]
    term1 = np.interp(tu, nodes, first) @ w
    term2 = np.interp(tu, nodes, second) @ (w * u)
    scale = kernel_constant(H) * special.gamma(1.5 - H)
    return ((2 - 2 * H) * term1 + nodes * term2) / scale


def cm_norm_kinv(h, H, points=JACOBI_POINTS):
    """Cameron-Martin norm as ||K^-1 h||_L2, for H > 1/2 only.

    The square norm is int_0^1 t^(1-2H) psi(t)^2 dt with psi from
    ``kinv``, integrated exactly against the power weight.
    """
    H = float(as_hurst(H))
    if H <= 0.5:
        raise CapabilityError('The k-inverse norm is implemented for H > 1/2 '
                              'only; got H={0}. Use the grid-rkhs method.'
                              .format(H))
    originCheck(h)
    square = 0.0
    for comp in range(h.dim):
        psi = _kinv_psi(h.values[:, comp], h.grid, H, points)
        square += fracCalc.weighted_integral(psi ** 2, h.grid, 1 - 2 * H)
    return CMNormResult(float(np.sqrt(max(square, 0.0))), h.grid.n,
                        K_INVERSE, H)


def pairing(f, h, H=None):
    """Natural pairing int_0^1 f dh as a left-point Riemann-Stieltjes sum,
    summed over components."""
    sameGridCheck(f, h)
    return float(np.sum(f.values[:-1] * h.increments()))


def w12_norm(h):
    """||h'||_L2 of the piecewise-linear interpolant."""
    originCheck(h)
    return float(np.sqrt(np.sum(h.increments() ** 2) / h.grid.dt))


def variation_norm(h, q):
    """Discrete q-variation norm, the supremum over node partitions of
    (sum |h(t_i+1) - h(t_i)|^q)^(1/q), by dynamic programming."""
    if q < 1:
        raise ValueError('q must be >= 1; got {0}.'.format(q))
    values = h.values
    best = np.zeros(len(values))
    for k in range(1, len(values)):
        jumps = np.linalg.norm(values[k] - values[:k], axis=1) ** q
        best[k] = np.max(best[:k] + jumps)
    return float(best[-1] ** (1.0 / q))


def holder_norm(h, gamma):
    """Largest |h(t) - h(s)| / |t - s|^gamma over node pairs."""
    nodes = h.grid.nodes
    k, j = np.triu_indices(len(nodes), 1)
    jumps = np.linalg.norm(h.values[j] - h.values[k], axis=1)
    return float(np.max(jumps / (nodes[j] - nodes[k]) ** gamma))


def embedding_ratio(h, H):
    """cm_norm / w12_norm, bounded for H < 1/2."""
    if float(as_hurst(H)) >= 0.5:
        warnings.warn('The W^{{1,2}} embedding bound holds for H < 1/2; got '
                      'H={0}.'.format(float(H)))
    denominator = w12_norm(h)
    if denominator == 0:
        raise ValueError('embedding_ratio needs a nonzero path.')
    return cm_norm(h, H).value / denominator


def surjectivity_table(beta, H, grid):
    """K* applied to t^(1/2-H) (1-t)^(beta+1/2-H) against its closed form
    C Gamma(beta+3/2-H) / Gamma(beta+1) t^(1/2-H) (1-t)^beta (H < 1/2).

    Returns
    -------
    pandas.DataFrame
        Columns t, computed, exact, rel_err on the interior nodes.
    """
    H = float(as_hurst(H))
    if H >= 0.5:
        raise ValueError('surjectivity_table is defined for H < 1/2; got '
                         'H={0}.'.format(H))
    if beta <= 0:
        raise ValueError('beta must be positive; got {0}.'.format(beta))
    nodes = grid.nodes
    f = Path(grid, nodes ** (0.5 - H) * (1 - nodes) ** (beta + 0.5 - H))
    computed = operator_Kstar(f, H).scalar()
    exact = kernel_constant_star(H) * special.gamma(beta + 1.5 - H) \
        / special.gamma(beta + 1) * nodes ** (0.5 - H) * (1 - nodes) ** beta
    inner = slice(1, -1)
    return pd.DataFrame({
        't': nodes[inner], 'computed': computed[inner],
        'exact': exact[inner],
        'rel_err': np.abs(computed[inner] - exact[inner])
        / np.abs(exact[inner])})
