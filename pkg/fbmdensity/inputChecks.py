import numbers

import numpy as np

from fbmdensity.exceptions import CapabilityError

# increment-only schemes lose the geometric limit at and below this value
SDE_HURST_FLOOR = 1.0 / 3.0


def hurstCheck(H):
    """Function to check a Hurst parameter entered by the user.

    Parameters
    ----------
        H : {float},
            Candidate Hurst parameter.

    Returns
    -------
    None
        Raises ValueError when H is not strictly inside (0, 1).
    """
    if isinstance(H, bool) or not isinstance(H, numbers.Real):
        raise ValueError('hurst must be a real number; got {0!r}.'.format(H))
    if not 0.0 < float(H) < 1.0:
        raise ValueError(
            'hurst must lie strictly inside (0, 1); got {0}.'.format(H))


def sdeHurstCheck(H):
    """Reject Hurst parameters the SDE solvers cannot handle."""
    hurstCheck(float(H))
    if float(H) <= SDE_HURST_FLOOR:
        raise CapabilityError(
            'SDE solving is supported for H > 1/3 only; got H={0}. The '
            'range (1/4, 1/3] needs Levy-area terms that the increment-only '
            'schemes do not simulate.'.format(float(H)))


def positiveIntCheck(value, name):
    """Check that ``value`` is an integer >= 1."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError('{0} must be an integer; got {1!r}.'.format(
            name, value))
    if value < 1:
        raise ValueError('{0} must be >= 1; got {1}.'.format(name, value))


def countCheck(value, name='count'):
    """Check a sample count (zero allowed)."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError('{0} must be an integer; got {1!r}.'.format(
            name, value))
    if value < 0:
        raise ValueError('{0} must be >= 0; got {1}.'.format(name, value))


def timeCheck(t, name='t'):
    """Check a time horizon t in (0, 1]."""
    if not 0.0 < float(t) <= 1.0:
        raise ValueError('{0} must lie in (0, 1]; got {1}.'.format(name, t))


def radiiCheck(radii):
    """Check sweep radii: positive and at most 1 (the local regime)."""
    radii = np.asarray(radii, dtype=float).ravel()
    if np.any(radii <= 0) or np.any(radii > 1):
        raise ValueError(
            'radii must lie in (0, 1]; got {0}.'.format(radii.tolist()))
    return radii


def pointCheck(x, N, name='x'):
    """Coerce a state vector and check its dimension."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (N,):
        raise ValueError('{0} must have dimension {1}; got {2}.'.format(
            name, N, x.shape[0]))
    if not np.all(np.isfinite(x)):
        raise ValueError('{0} must be finite; got {1}.'.format(
            name, x.tolist()))
    return x


def sameGridCheck(first, second):
    """Two paths must share grid and dimension."""
    if first.grid != second.grid:
        raise ValueError('Paths live on different grids (n={0} and '
                         'n={1}).'.format(first.grid.n, second.grid.n))
    if first.dim != second.dim:
        raise ValueError('Dimension mismatch: {0} and {1}.'.format(
            first.dim, second.dim))


def originCheck(path, name='h'):
    """Cameron-Martin and noise paths start at zero."""
    if np.any(np.abs(path.start) > 1e-12):
        raise ValueError('{0} must vanish at t=0; got {1}.'.format(
            name, path.start.tolist()))
