import pickle

import numpy as np
import pytest

from fbmdensity.exceptions import EllipticityError
from fbmdensity.vectorFields import (REGISTRY, ConstSigmaField,
                                     IdentityField, LinearField,
                                     SinPerturbedField,
                                     ellipticity_certificate, jacobian_check,
                                     registry_build)


def test_registry_families():
    assert set(REGISTRY) == {'identity', 'const-sigma', 'sin-perturbed'}
    for name in REGISTRY:
        V = registry_build(name, {}, 2)
        assert V.N == 2 and V.d == 2
        assert ellipticity_certificate(V)
        assert jacobian_check(V) < 1e-6


def test_batched_shapes(sin2):
    x = np.zeros((5, 3, 2))
    assert sin2.eval(x).shape == (5, 3, 2, 2)
    assert sin2.jac(x).shape == (5, 3, 2, 2, 2)
    assert sin2.gram(x).shape == (5, 3, 2, 2)
    with pytest.raises(ValueError, match='R\\^2'):
        sin2.eval(np.zeros(3))


def test_sin_perturbed_values():
    V = SinPerturbedField(1, epsilon=0.2)
    x = np.array([[0.3]])
    assert V.eval(x)[0, 0, 0] == pytest.approx(1 + 0.2 * np.sin(0.3))
    assert V.jac(x)[0, 0, 0, 0] == pytest.approx(0.2 * np.cos(0.3))
    assert V.lambda1 == pytest.approx(0.64)
    assert V.lambda2 == pytest.approx(1.44)


def test_sin_perturbed_needs_small_epsilon():
    with pytest.raises(EllipticityError, match='epsilon'):
        registry_build('sin-perturbed', {'epsilon': 1.5}, 1)


def test_const_sigma_constants():
    V = ConstSigmaField(2, sigma=2.0, shear=0.5)
    np.testing.assert_allclose(V.matrix, [[2.0, 1.0], [0.0, 2.0]])
    singular = np.linalg.svd(V.matrix, compute_uv=False)
    assert V.lambda1 == pytest.approx(singular.min() ** 2)
    assert V.lambda2 == pytest.approx(singular.max() ** 2)
    with pytest.raises(EllipticityError, match='sigma'):
        ConstSigmaField(2, sigma=0.0)


def test_drift_variants():
    V = registry_build('sin-perturbed', {'drift': 0.5}, 2)
    assert V.has_drift
    x = np.array([0.0, np.pi / 2])
    np.testing.assert_allclose(V.drift(x), [0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(np.diag(V.drift_jac(x)), [0.0, -0.5],
                               atol=1e-15)
    W = IdentityField(2, drift=1.0)
    np.testing.assert_allclose(W.drift(np.zeros(2)), [1.0, 1.0])
    assert not IdentityField(2).has_drift


def test_linear_field_is_not_certified():
    V = LinearField(2.0)
    assert V.eval(np.array([[3.0]]))[0, 0, 0] == 6.0
    assert not ellipticity_certificate(V)
    assert jacobian_check(V) < 1e-8


def test_registry_errors():
    with pytest.raises(ValueError, match='Unknown field family'):
        registry_build('bogus')
    with pytest.raises(ValueError, match='Unknown parameter'):
        registry_build('identity', {'epsilon': 0.1})


def test_fields_pickle(sin2):
    clone = pickle.loads(pickle.dumps(sin2))
    x = np.array([0.4, -1.0])
    np.testing.assert_array_equal(clone.eval(x), sin2.eval(x))


@pytest.mark.parametrize('V', [IdentityField(2),
                               ConstSigmaField(2, sigma=1.5, shear=0.5),
                               SinPerturbedField(2, epsilon=0.3),
                               LinearField(0.7)])
def test_hessian_matches_jacobian_differences(V):
    x = np.random.default_rng(3).uniform(-2, 2, size=(6, V.N))
    step = 1e-5
    numeric = np.empty(x.shape[:-1] + (V.N, V.d, V.N, V.N))
    for m in range(V.N):
        e = np.zeros(V.N)
        e[m] = step
        numeric[..., m] = (V.jac(x + e) - V.jac(x - e)) / (2 * step)
    np.testing.assert_allclose(V.hess(x), numeric, atol=1e-8)
