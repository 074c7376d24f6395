"""Registry of closed-form vector field families.

Every family evaluates on batches of states: ``eval(x)`` maps an array of
shape (..., N) to the matrices V(x) of shape (..., N, d) whose columns are
V_1..V_d, and ``jac(x)`` returns dV with shape (..., N, d, N) where
``jac(x)[..., i, a, k]`` is the derivative of V_a^i in the direction x_k.
``hess(x)`` adds the second derivatives, shape (..., N, d, N, N).
Families are plain classes so they pickle into worker processes.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from fbmdensity.core import rng_stream
from fbmdensity.exceptions import EllipticityError

logger = logging.getLogger(__name__)

# ellipticity is certified on [-CERTIFICATE_BOX, CERTIFICATE_BOX]^N
CERTIFICATE_BOX = 10.0


class VectorFieldSet(object):
    """Vector fields V = (V_1, ..., V_d) on R^N with optional drift V_0.

    Parameters
    ----------
        N : int
            State dimension.
        d : int
            Driving dimension.
        lambda1, lambda2 : float or None
            Declared ellipticity constants,
            lambda1 |xi|^2 <= xi* V V* xi <= lambda2 |xi|^2.
        drift : float, optional
            Scale of the smooth bounded drift V_0; 0 means no drift.
    """
    name = 'custom'

    def __init__(self, N, d, lambda1=None, lambda2=None, drift=0.0,
                 params=None):
        self.N = int(N)
        self.d = int(d)
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.drift_scale = float(drift)
        self.params = dict(params or {})

    def __repr__(self):
        return '{0}(N={1}, d={2}, params={3})'.format(
            type(self).__name__, self.N, self.d, self.params)

    def _batch(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.N:
            raise ValueError('State has dimension {0}; the vector fields '
                             'act on R^{1}.'.format(x.shape[-1], self.N))
        return x

    def eval(self, x):
        raise NotImplementedError

    def jac(self, x):
        raise NotImplementedError

    def hess(self, x):
        raise NotImplementedError

    @property
    def has_drift(self):
        return self.drift_scale != 0.0

    def drift(self, x):
        """V_0(x), shape (..., N)."""
        x = self._batch(x)
        return self.drift_scale * np.ones_like(x)

    def drift_jac(self, x):
        """dV_0(x), shape (..., N, N)."""
        x = self._batch(x)
        return np.zeros(x.shape + (self.N,))

    def gram(self, x):
        """V(x) V(x)*, shape (..., N, N)."""
        v = self.eval(x)
        return v @ np.swapaxes(v, -1, -2)


class IdentityField(VectorFieldSet):
    """V(x) = Id on R^N (N = d)."""
    name = 'identity'

    def __init__(self, N, drift=0.0):
        super(IdentityField, self).__init__(N, N, 1.0, 1.0, drift,
                                            {'drift': drift})

    def eval(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (self.N, self.N)) + np.eye(self.N)

    def jac(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (self.N, self.N, self.N))

    def hess(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (self.N,) * 4)


class ConstSigmaField(VectorFieldSet):
    """Constant full-rank V(x) = sigma (Id + shear U), U strictly upper
    triangular ones."""
    name = 'const-sigma'

    def __init__(self, N, sigma=1.0, shear=0.0, drift=0.0):
        if sigma == 0:
            raise EllipticityError('const-sigma needs sigma != 0.')
        matrix = sigma * (np.eye(N) + shear * np.triu(np.ones((N, N)), 1))
        singular = np.linalg.svd(matrix, compute_uv=False)
        super(ConstSigmaField, self).__init__(
            N, N, float(singular.min() ** 2), float(singular.max() ** 2),
            drift, {'sigma': sigma, 'shear': shear, 'drift': drift})
        self.matrix = matrix

    def eval(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (self.N, self.N)) + self.matrix

    def jac(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (self.N, self.N, self.N))

    def hess(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (self.N,) * 4)


class SinPerturbedField(VectorFieldSet):
    """V(x) = Id + epsilon diag(sin x_i), elliptic for |epsilon| < 1.

    The drift, when present, is V_0(x) = drift * cos(x) componentwise.
    """
    name = 'sin-perturbed'

    def __init__(self, N, epsilon=0.1, drift=0.0):
        if not abs(epsilon) < 1:
            raise EllipticityError(
                'sin-perturbed needs |epsilon| < 1 for ellipticity; got '
                'epsilon={0} (V degenerates where sin x = -1/epsilon or '
                'changes sign).'.format(epsilon))
        super(SinPerturbedField, self).__init__(
            N, N, (1.0 - abs(epsilon)) ** 2, (1.0 + abs(epsilon)) ** 2,
            drift, {'epsilon': epsilon, 'drift': drift})
        self.epsilon = float(epsilon)

    def eval(self, x):
        x = self._batch(x)
        diag = 1.0 + self.epsilon * np.sin(x)
        return diag[..., :, None] * np.eye(self.N)

    def jac(self, x):
        x = self._batch(x)
        out = np.zeros(x.shape[:-1] + (self.N, self.N, self.N))
        idx = np.arange(self.N)
        out[..., idx, idx, idx] = self.epsilon * np.cos(x)
        return out

    def hess(self, x):
        x = self._batch(x)
        out = np.zeros(x.shape[:-1] + (self.N,) * 4)
        idx = np.arange(self.N)
        out[..., idx, idx, idx, idx] = -self.epsilon * np.sin(x)
        return out

    def drift(self, x):
        x = self._batch(x)
        return self.drift_scale * np.cos(x)

    def drift_jac(self, x):
        x = self._batch(x)
        return (-self.drift_scale * np.sin(x))[..., :, None] * np.eye(self.N)


class LinearField(VectorFieldSet):
    """Scalar V(x) = a x. Not uniformly elliptic; it is kept out of the
    registry and serves as a closed-form case (the flow is x e^{a h})."""
    name = 'linear'

    def __init__(self, a=1.0):
        super(LinearField, self).__init__(1, 1, None, None, 0.0, {'a': a})
        self.a = float(a)

    def eval(self, x):
        x = self._batch(x)
        return self.a * x[..., None]

    def jac(self, x):
        x = self._batch(x)
        return np.full(x.shape[:-1] + (1, 1, 1), self.a)

    def hess(self, x):
        x = self._batch(x)
        return np.zeros(x.shape[:-1] + (1, 1, 1, 1))


@dataclass(frozen=True)
class FieldRegistryEntry(object):
    """A registered family: name, default parameters and builder."""
    name: str
    builder: type
    params: dict = field(default_factory=dict)
    doc: str = ''


REGISTRY = {
    'identity': FieldRegistryEntry(
        'identity', IdentityField, {'drift': 0.0},
        'V(x) = Id, lambda1 = lambda2 = 1.'),
    'const-sigma': FieldRegistryEntry(
        'const-sigma', ConstSigmaField,
        {'sigma': 1.0, 'shear': 0.0, 'drift': 0.0},
        'V(x) = sigma (Id + shear U); lambda1, lambda2 are the extreme '
        'squared singular values; sigma != 0.'),
    'sin-perturbed': FieldRegistryEntry(
        'sin-perturbed', SinPerturbedField, {'epsilon': 0.1, 'drift': 0.0},
        'V(x) = Id + epsilon diag(sin x), |epsilon| < 1, lambda1 = '
        '(1-|epsilon|)^2, lambda2 = (1+|epsilon|)^2.'),
}


def ellipticity_certificate(V, box=CERTIFICATE_BOX, samples=100, seed=0,
                            rtol=1e-12):
    """Check lambda1 |xi|^2 <= xi* V V* xi <= lambda2 |xi|^2 on random
    samples (x, xi) with x uniform in [-box, box]^N.

    Returns
    -------
    bool
    """
    if V.lambda1 is None or V.lambda2 is None:
        return False
    rng = rng_stream(seed, 0)
    x = rng.uniform(-box, box, size=(samples, V.N))
    xi = rng.standard_normal((samples, V.N))
    quad = np.einsum('pi,pij,pj->p', xi, V.gram(x), xi)
    norm2 = np.sum(xi ** 2, axis=1)
    lower = V.lambda1 * norm2 * (1.0 - rtol)
    upper = V.lambda2 * norm2 * (1.0 + rtol)
    passed = bool(np.all(quad >= lower) and np.all(quad <= upper))
    logger.debug('ellipticity certificate for %r: %s', V, passed)
    return passed


def jacobian_check(V, points=20, seed=0, step=1e-6, box=CERTIFICATE_BOX):
    """Largest relative error between ``jac`` and central differences of
    ``eval`` over random points."""
    rng = rng_stream(seed, 1)
    x = rng.uniform(-box, box, size=(points, V.N))
    analytic = V.jac(x)
    numeric = np.empty_like(analytic)
    for k in range(V.N):
        e = np.zeros(V.N)
        e[k] = step
        numeric[..., k] = (V.eval(x + e) - V.eval(x - e)) / (2 * step)
    scale = max(np.abs(analytic).max(), 1.0)
    return float(np.abs(numeric - analytic).max() / scale)


def registry_build(name, params=None, N=1):
    """Build a registered vector field family.

    Parameters
    ----------
        name : str
            One of ``REGISTRY``.
        params : dict, optional
            Family parameters; missing ones take the registry defaults.
        N : int
            State dimension (equal to the driving dimension for the
            built-in families).

    Returns
    -------
    V : VectorFieldSet
        Passing the ellipticity certificate.
    """
    if name not in REGISTRY:
        raise ValueError('Unknown field family {0!r}. Choose between '
                         '{1}.'.format(name, ', '.join(sorted(REGISTRY))))
    entry = REGISTRY[name]
    params = dict(params or {})
    unknown = set(params) - set(entry.params)
    if unknown:
        raise ValueError('Unknown parameter(s) {0} for field {1!r}; '
                         'accepted: {2}.'.format(sorted(unknown), name,
                                                 sorted(entry.params)))
    merged = dict(entry.params)
    merged.update({k: float(v) for k, v in params.items()})
    V = entry.builder(int(N), **merged)
    if not ellipticity_certificate(V):
        raise EllipticityError(
            'Field {0!r} with parameters {1} fails the ellipticity '
            'certificate on [-{2}, {2}]^{3}.'.format(name, merged,
                                                     CERTIFICATE_BOX, N))
    return V
