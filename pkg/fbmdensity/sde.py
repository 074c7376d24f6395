"""Deterministic Ito map and pathwise solvers for equations driven by
fractional noise, with the Jacobian flow and its inverse."""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from fbmdensity.core import Path, as_hurst
from fbmdensity.inputChecks import pointCheck, sdeHurstCheck

logger = logging.getLogger(__name__)

YOUNG_EULER = 'young-euler'
MILSTEIN = 'milstein-increment'
ODE_RK4 = 'ode-rk4'
SCHEMES = (YOUNG_EULER, MILSTEIN, ODE_RK4)

JACOBIAN_TOL = 1e-8


@dataclass(frozen=True)
class SolveResult(object):
    """State path with the Jacobian flow J_t and its inverse at every node
    (shape (n+1, N, N)); the Jacobians are None when not propagated."""
    state: Path
    jacobian: np.ndarray = field(repr=False, default=None)
    jacobian_inv: np.ndarray = field(repr=False, default=None)
    scheme: str = MILSTEIN

    @property
    def endpoint(self):
        return self.state.end

    def jacobian_defect(self):
        """max over nodes of ||J J^-1 - I||_max."""
        if self.jacobian is None:
            return 0.0
        eye = np.eye(self.jacobian.shape[-1])
        return float(np.abs(self.jacobian @ self.jacobian_inv - eye).max())


def _schemeCheck(scheme):
    if scheme not in SCHEMES:
        raise ValueError('scheme must be one of {0}; got {1!r}.'.format(
            SCHEMES, scheme))


def _rk4_rhs(V, X, J, Jinv, dh):
    dX = np.einsum('...id,...d->...i', V.eval(X), dh)
    if J is None:
        return dX, None, None
    A = np.einsum('...iak,...a->...ik', V.jac(X), dh)
    return dX, A @ J, -Jinv @ A


def _rk4_step(V, X, J, Jinv, dh):
    """Classical RK4 over one cell in the cell parameter s in [0, 1], the
    driver moving by dh."""
    jac = J is not None

    def shifted(base, slope, c):
        return None if base is None else base + c * slope

    k1 = _rk4_rhs(V, X, J, Jinv, dh)
    k2 = _rk4_rhs(V, *(shifted(b, s, 0.5) for b, s in zip((X, J, Jinv), k1)),
                  dh)
    k3 = _rk4_rhs(V, *(shifted(b, s, 0.5) for b, s in zip((X, J, Jinv), k2)),
                  dh)
    k4 = _rk4_rhs(V, *(shifted(b, s, 1.0) for b, s in zip((X, J, Jinv), k3)),
                  dh)
    out = []
    for index, base in enumerate((X, J, Jinv)):
        if index > 0 and not jac:
            out.append(None)
            continue
        out.append(base + (k1[index] + 2 * k2[index] + 2 * k3[index]
                           + k4[index]) / 6.0)
    return out


def integrate_increments(x, increments, V, scheme=MILSTEIN, jacobian=True,
                         drift_scale=0.0):
    """Step the equation dX = V(X) dw (+ drift_scale V_0(X) dt) through
    given driver increments.

    Parameters
    ----------
        x : array_like
            Start point, shape (N,) or broadcastable to the batch.
        increments : array_like
            Driver increments, shape (..., n, d); leading axes are a batch.
        V : VectorFieldSet
        scheme : {'milstein-increment', 'young-euler', 'ode-rk4'}
            'ode-rk4' treats the driver as piecewise linear.
        jacobian : bool
            Propagate J and J^-1 alongside.
        drift_scale : float
            Multiplier of V_0 dt; 0 skips the drift entirely.

    Returns
    -------
    states : numpy.ndarray
        Shape (..., n+1, N).
    J, Jinv : numpy.ndarray or None
        Shape (..., n+1, N, N).
    """
    _schemeCheck(scheme)
    increments = np.asarray(increments, dtype=float)
    batch = increments.shape[:-2]
    n, d = increments.shape[-2:]
    if d != V.d:
        raise ValueError('Driver has {0} components; the vector fields '
                         'expect d={1}.'.format(d, V.d))
    N = V.N
    dt = 1.0 / n
    X = np.broadcast_to(np.asarray(x, dtype=float), batch + (N,)).copy()
    states = np.empty(batch + (n + 1, N))
    states[..., 0, :] = X
    J = Jinv = Js = Jinvs = None
    if jacobian:
        J = np.broadcast_to(np.eye(N), batch + (N, N)).copy()
        Jinv = J.copy()
        Js = np.empty(batch + (n + 1, N, N))
        Jinvs = np.empty_like(Js)
        Js[..., 0, :, :] = J
        Jinvs[..., 0, :, :] = Jinv
    use_drift = drift_scale != 0.0 and V.has_drift
    eye = np.eye(N)
    for k in range(n):
        dw = increments[..., k, :]
        if scheme == ODE_RK4:
            X, J, Jinv = _rk4_step(V, X, J, Jinv, dw)
        else:
            v = V.eval(X)
            step = np.einsum('...id,...d->...i', v, dw)
            A = np.einsum('...iak,...a->...ik', V.jac(X), dw)
            if scheme == MILSTEIN:
                X_new = X + step + 0.5 * np.einsum('...ik,...k->...i', A,
                                                   step)
            else:
                X_new = X + step
            if use_drift:
                X_new = X_new + drift_scale * dt * V.drift(X)
            if jacobian:
                # tangent of the step map itself
                D = eye + A
                if scheme == MILSTEIN:
                    D = D + 0.5 * (A @ A + np.einsum(
                        '...iakm,...k,...a->...im', V.hess(X), step, dw))
                if use_drift:
                    D = D + drift_scale * dt * V.drift_jac(X)
                J = D @ J
                Jinv = Jinv @ np.linalg.inv(D)
            X = X_new
        states[..., k + 1, :] = X
        if jacobian:
            Js[..., k + 1, :, :] = J
            Jinvs[..., k + 1, :, :] = Jinv
    return states, Js, Jinvs


def _result(states, Js, Jinvs, grid, scheme):
    result = SolveResult(Path(grid, states), Js, Jinvs, scheme)
    if Js is not None:
        defect = result.jacobian_defect()
        if defect > JACOBIAN_TOL:
            warnings.warn('Jacobian and inverse Jacobian drift apart: '
                          '||J J^-1 - I|| = {0:.3g}.'.format(defect))
    return result


def ito_map(x, h, V, jacobian=True):
    """Deterministic Ito map Phi_t(x; h), solving dX = V(X) h' dt with
    classical RK4 per grid cell (h piecewise linear), J and J^-1 from the
    variational equations dJ = dV(X)[h' dt] J, dJ^-1 = -J^-1 dV(X)[h' dt].

    Parameters
    ----------
        x : array_like
            Start point in R^N.
        h : Path
            Driver in R^d.
        V : VectorFieldSet

    Returns
    -------
    SolveResult
    """
    x = pointCheck(x, V.N)
    states, Js, Jinvs = integrate_increments(x, h.increments(), V, ODE_RK4,
                                             jacobian)
    return _result(states, Js, Jinvs, h.grid, ODE_RK4)


def solve_sde(x, B, V, H, scheme=MILSTEIN, jacobian=True):
    """Pathwise solution of dX = V(X) dB for a sampled fBm path.

    The default increment-only Milstein step
    X + V dB + 1/2 dV[V dB] dB targets the geometric solution in both
    regimes (Young for H > 1/2, rough for 1/3 < H <= 1/2); 'young-euler'
    drops the second-order term. Milstein is also the default for
    H > 1/2; pass scheme='young-euler' for the Euler step. J is the exact
    derivative of the discrete step map and J^-1 multiplies by the inverse
    of each step derivative, so J J^-1 = I to roundoff.

    Raises
    ------
    CapabilityError
        For H <= 1/3.
    """
    return solve_sde_drift(x, B, V, H, 0.0, scheme, jacobian)


def solve_sde_drift(x, B, V, H, epsilon, scheme=MILSTEIN, jacobian=True):
    """As ``solve_sde`` with the drift eps^(1/H) V_0(X) dt added to each
    step."""
    H = float(as_hurst(H))
    sdeHurstCheck(H)
    _schemeCheck(scheme)
    if scheme == ODE_RK4:
        raise ValueError('ode-rk4 is reserved for the Ito map of smooth '
                         'drivers; use young-euler or milstein-increment.')
    x = pointCheck(x, V.N)
    if epsilon < 0:
        raise ValueError('epsilon must be >= 0; got {0}.'.format(epsilon))
    drift_scale = float(epsilon) ** (1.0 / H) if V.has_drift else 0.0
    states, Js, Jinvs = integrate_increments(x, B.increments(), V, scheme,
                                             jacobian, drift_scale)
    return _result(states, Js, Jinvs, B.grid, scheme)
