import numpy as np
import pytest

from fbmdensity.core import Path, make_grid, rng_stream
from fbmdensity.malliavin import (DOUBLE_INTEGRAL, L2_LOWER_BOUND,
                                  SCAN_COLUMNS, cell_pair_weights,
                                  dphi_kernel, gamma_l2_bound, gamma_matrix,
                                  gamma_young, nondegeneracy_scan,
                                  random_smooth_path)
from fbmdensity.sde import ito_map
from fbmdensity.vectorFields import LinearField, registry_build


@pytest.fixture
def grid32():
    return make_grid(32)


def _path2(grid):
    t = grid.nodes
    return Path(grid, np.column_stack([np.sin(2 * t), t ** 2 - t]))


@pytest.mark.parametrize('H', [0.75, 0.6])
def test_cell_pair_weights_integrate_kernel(H):
    weights = cell_pair_weights(40, H)
    assert H * (2 * H - 1) * weights.sum() == pytest.approx(1.0, rel=1e-10)
    np.testing.assert_allclose(weights, weights.T)


@pytest.mark.parametrize('H', [0.75, 0.4])
def test_identity_gamma(grid32, H):
    V = registry_build('identity', {}, 2)
    gamma = gamma_matrix(ito_map([0.0, 0.0], _path2(grid32), V), V, H)
    np.testing.assert_allclose(gamma.matrix, np.eye(2), atol=1e-10)
    assert gamma.det == pytest.approx(1.0, abs=1e-10)
    assert gamma.regime == (DOUBLE_INTEGRAL if H > 0.5 else L2_LOWER_BOUND)


@pytest.mark.parametrize('H', [0.75, 0.4])
def test_constant_sigma_gamma(grid32, H):
    V = registry_build('const-sigma', {'sigma': 1.5, 'shear': 0.5}, 2)
    gamma = gamma_matrix(ito_map([1.0, -1.0], _path2(grid32), V), V, H)
    np.testing.assert_allclose(gamma.matrix, V.matrix @ V.matrix.T,
                               atol=1e-10)
    np.testing.assert_allclose(np.sort(gamma.eigenvalues),
                               np.sort(np.linalg.eigvalsh(
                                   V.matrix @ V.matrix.T)), atol=1e-10)


def test_linear_field_gamma(grid32):
    V = LinearField(0.5)
    h = Path(grid32, np.sin(3 * grid32.nodes))
    result = ito_map([2.0], h, V)
    kernel = dphi_kernel(result, V)
    expected = 0.5 * 2.0 * np.exp(0.5 * h.end[0])
    np.testing.assert_allclose(kernel[:, 0, 0], expected, rtol=1e-7)
    assert gamma_young(result, V, 0.75).det == pytest.approx(expected ** 2,
                                                             rel=1e-6)


def test_linear_field_gamma_on_ramp():
    # h = t drives X_t = x e^t, so the kernel is the constant x e
    grid = make_grid(64)
    V = LinearField(1.0)
    result = ito_map([2.0], Path(grid, grid.nodes), V)
    gamma = gamma_young(result, V, 0.75)
    assert gamma.matrix[0, 0] == pytest.approx(np.e ** 2 * 4.0, rel=1e-4)


def test_regime_guards(grid32, identity1):
    result = ito_map([0.0], Path(grid32, grid32.nodes), identity1)
    with pytest.raises(ValueError, match='H > 1/2'):
        gamma_young(result, identity1, 0.4)
    with pytest.raises(ValueError, match='H <= 1/2'):
        gamma_l2_bound(result, identity1, 0.75)
    bare = ito_map([0.0], Path(grid32, grid32.nodes), identity1,
                   jacobian=False)
    with pytest.raises(ValueError, match='jacobian=True'):
        dphi_kernel(bare, identity1)


def test_random_smooth_path(grid32):
    h = random_smooth_path(grid32, 3, rng_stream(0, 1))
    assert h.dim == 3
    np.testing.assert_array_equal(h.start, 0.0)


def test_identity_scan(grid32):
    V = registry_build('identity', {}, 2)
    scan = nondegeneracy_scan([0.0, 0.0], V, 0.75, 2.0, 10, seed=1,
                              grid=grid32)
    assert list(scan.table.columns) == SCAN_COLUMNS
    assert scan.excluded == 0
    assert scan.det_min == pytest.approx(1.0, abs=1e-6)
    assert scan.det_max == pytest.approx(1.0, abs=1e-6)
    assert scan.table['h_norm'].max() <= 2.0 + 1e-9


@pytest.mark.slow
@pytest.mark.parametrize('H', [0.75, 0.4])
def test_sin_perturbed_scan(sin2, H):
    scan = nondegeneracy_scan([0.0, 0.0], sin2, H, 2.0, 200, seed=42,
                              grid=make_grid(64))
    assert scan.det_min > 0
    assert scan.det_max / scan.det_min <= 10


def test_scan_is_reproducible(sin2, grid32):
    first = nondegeneracy_scan([0.0, 0.0], sin2, 0.6, 1.0, 5, 3, grid32)
    second = nondegeneracy_scan([0.0, 0.0], sin2, 0.6, 1.0, 5, 3, grid32)
    np.testing.assert_array_equal(first.table['det'], second.table['det'])


def test_scan_validation(sin2, grid32):
    with pytest.raises(ValueError, match='empty'):
        nondegeneracy_scan([0.0, 0.0], sin2, 0.6, 1.0, 0, 3, grid32)
    with pytest.raises(ValueError, match='M must be positive'):
        nondegeneracy_scan([0.0, 0.0], sin2, 0.6, 0.0, 5, 3, grid32)
