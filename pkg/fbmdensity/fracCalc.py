"""Riemann-Liouville fractional integrals and Marchaud derivatives on
uniform grids.

All operators act on piecewise-linear interpolants of grid data and
integrate the singular weight exactly cell by cell (product integration),
so each operator is a fixed (n+1) x (n+1) matrix. Matrices are cached per
(n, alpha) and applied along the first axis, which lets callers push
several paths through at once.
"""
import functools
import logging
import numbers
from dataclasses import dataclass

import numpy as np
from scipy import special

from fbmdensity.core import Path

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FracOrder(object):
    """Order alpha of a fractional operator.

    alpha = 0 is the identity; derivatives need alpha in [0, 1).
    """
    alpha: float

    def __post_init__(self):
        if isinstance(self.alpha, bool) or not isinstance(self.alpha,
                                                          numbers.Real):
            raise ValueError('alpha must be a real number; got {0!r}.'.format(
                self.alpha))
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError('alpha must be >= 0; got {0}.'.format(
                self.alpha))
        object.__setattr__(self, 'alpha', float(self.alpha))

    def for_derivative(self):
        if self.alpha >= 1:
            raise ValueError('Fractional derivatives are implemented for '
                             'alpha in (0, 1) only; got alpha={0}.'.format(
                                 self.alpha))
        return self


def as_order(alpha):
    if isinstance(alpha, FracOrder):
        return alpha
    return FracOrder(alpha)


def _readonly(matrix):
    matrix.setflags(write=False)
    return matrix


@functools.lru_cache(maxsize=128)
def int_weights(n, alpha):
    """Matrix of I_{0+}^alpha on the grid k/n (lower triangular)."""
    h = 1.0 / n
    m = np.arange(1, n + 1, dtype=float)
    a = (m - 1.0) ** alpha
    b = m ** alpha
    a0 = (b - a) / alpha
    a1 = m * (b - a) / alpha - (m ** (alpha + 1) - (m - 1.0) ** (alpha + 1)) \
        / (alpha + 1)
    scale = h ** alpha / special.gamma(alpha)
    c0 = np.concatenate(([0.0], (a0 - a1) * scale))
    c1 = np.concatenate(([0.0], a1 * scale))
    k, j = np.tril_indices(n + 1, -1)
    weights = np.zeros((n + 1, n + 1))
    weights[k, j] += c0[k - j]
    weights[k, j + 1] += c1[k - j]
    return _readonly(weights)


@functools.lru_cache(maxsize=128)
def weighted_int_weights(n, alpha, gamma):
    """Matrix of f -> I_{0+}^alpha (s^gamma f) for gamma > -1.

    Cell integrals of (t - s)^(alpha-1) s^p come from the regularized
    incomplete beta function. At t = 0 the operator vanishes when
    alpha + gamma > 0 and tends to f(0) B(gamma+1, alpha) / Gamma(alpha)
    when alpha + gamma = 0.
    """
    if gamma <= -1:
        raise ValueError('The power weight s^gamma needs gamma > -1; got '
                         '{0}.'.format(gamma))
    nodes = np.arange(n + 1) / n
    h = 1.0 / n
    k, j = np.tril_indices(n + 1, -1)
    t = nodes[k]
    lo = nodes[j] / t
    hi = nodes[j + 1] / t

    def cell(p):
        full = t ** (alpha + p) * special.beta(p + 1, alpha)
        return full * (special.betainc(p + 1, alpha, hi)
                       - special.betainc(p + 1, alpha, lo))

    p0 = cell(gamma)
    p1 = cell(gamma + 1)
    weights = np.zeros((n + 1, n + 1))
    weights[k, j] += (nodes[j + 1] * p0 - p1) / h
    weights[k, j + 1] += (p1 - nodes[j] * p0) / h
    weights /= special.gamma(alpha)
    if abs(alpha + gamma) < 1e-12:
        weights[0, 0] = special.beta(gamma + 1, alpha) / special.gamma(alpha)
    elif alpha + gamma < 0:
        weights[0, :] = np.nan
    return _readonly(weights)


@functools.lru_cache(maxsize=128)
def deriv_weights(n, alpha):
    """Matrix of the Marchaud derivative D_{0+}^alpha, row 0 is NaN."""
    h = 1.0 / n
    weights = np.zeros((n + 1, n + 1))
    weights[0, :] = np.nan
    k = np.arange(1, n + 1)
    nodes = k * h
    last = alpha * h ** (-alpha) / (1.0 - alpha)
    weights[k, k] += nodes ** (-alpha) + last
    weights[k, k - 1] -= last
    # cells not touching t_k, indexed by m = k - j >= 2
    m = np.arange(2, n + 1, dtype=float)
    b0 = ((m - 1.0) ** (-alpha) - m ** (-alpha)) / alpha
    b1 = m * b0 - (m ** (1.0 - alpha) - (m - 1.0) ** (1.0 - alpha)) \
        / (1.0 - alpha)
    scale = alpha * h ** (-alpha)
    b0 = np.concatenate(([0.0, 0.0], b0 * scale))
    b1 = np.concatenate(([0.0, 0.0], b1 * scale))
    kk, jj = np.tril_indices(n + 1, -2)
    np.add.at(weights, (kk, kk), b0[kk - jj])
    weights[kk, jj] += b1[kk - jj] - b0[kk - jj]
    weights[kk, jj + 1] -= b1[kk - jj]
    weights[1:] /= special.gamma(1.0 - alpha)
    return _readonly(weights)


def _values(f):
    if isinstance(f, Path):
        return f.grid, f.scalar()
    raise ValueError('Expected a scalar Path; got {0!r}.'.format(type(f)))


def apply_left(weights, values):
    """Apply a left operator matrix along axis 0."""
    return np.tensordot(weights, values, axes=(1, 0))


def apply_right(weights, values):
    """Apply the reflection of a left operator matrix: reverse, apply,
    reverse."""
    return apply_left(weights, values[::-1])[::-1]


def frac_int_left(f, alpha):
    """Left fractional integral (I_{0+}^alpha f)(t_k).

    Parameters
    ----------
        f : Path
            Scalar path, interpolated linearly between nodes.
        alpha : float or FracOrder
            alpha >= 0; alpha = 0 returns f.

    Returns
    -------
    Path
    """
    grid, values = _values(f)
    alpha = as_order(alpha).alpha
    if alpha == 0:
        return f
    return Path(grid, apply_left(int_weights(grid.n, alpha), values))


def frac_int_right(f, alpha):
    """Right fractional integral (I_{1-}^alpha f)(t_k)."""
    grid, values = _values(f)
    alpha = as_order(alpha).alpha
    if alpha == 0:
        return f
    return Path(grid, apply_right(int_weights(grid.n, alpha), values))


def frac_int_left_weighted(f, alpha, gamma):
    """I_{0+}^alpha applied to s^gamma f(s), gamma > -1."""
    grid, values = _values(f)
    alpha = as_order(alpha).alpha
    if alpha == 0:
        with np.errstate(divide='ignore'):
            return Path(grid, grid.nodes ** gamma * values)
    weights = weighted_int_weights(grid.n, alpha, float(gamma))
    return Path(grid, apply_left(weights, values))


def frac_deriv_left(f, alpha):
    """Marchaud form of the left derivative,
    D^alpha f(t) = [f(t) t^-alpha + alpha int_0^t (f(t) - f(s))
    (t - s)^(-alpha-1) ds] / Gamma(1 - alpha).

    The value at t_0 is NaN (excluded endpoint).
    """
    grid, values = _values(f)
    alpha = as_order(alpha).for_derivative().alpha
    if alpha == 0:
        return f
    return Path(grid, apply_left(deriv_weights(grid.n, alpha), values))


def frac_deriv_right(f, alpha):
    """Right derivative D_{1-}^alpha; NaN at t_n."""
    grid, values = _values(f)
    alpha = as_order(alpha).for_derivative().alpha
    if alpha == 0:
        return f
    return Path(grid, apply_right(deriv_weights(grid.n, alpha), values))


def weighted_integral(values, grid, gamma=0.0):
    """Integral over [0, 1] of s^gamma times the piecewise-linear
    interpolant of ``values`` (axis 0 runs over the nodes)."""
    if gamma <= -1:
        raise ValueError('gamma must be > -1; got {0}.'.format(gamma))
    nodes = grid.nodes
    lo, hi = nodes[:-1], nodes[1:]
    p0 = (hi ** (gamma + 1) - lo ** (gamma + 1)) / (gamma + 1)
    p1 = (hi ** (gamma + 2) - lo ** (gamma + 2)) / (gamma + 2)
    c = np.zeros(len(nodes))
    c[:-1] += (hi * p0 - p1) / grid.dt
    c[1:] += (p1 - lo * p0) / grid.dt
    return np.tensordot(c, np.asarray(values, dtype=float), axes=(0, 0))
