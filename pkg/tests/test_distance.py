import numpy as np
import pytest

from fbmdensity.core import make_grid
from fbmdensity.distance import (SWEEP_COLUMNS, OptimizeOptions,
                                 asymmetry_report, comparison_sweep,
                                 connecting_path, distance_optimize,
                                 distance_upper, scalar_distance_oracle,
                                 unit_directions)
from fbmdensity.exceptions import EllipticityError
from fbmdensity.sde import ito_map
from fbmdensity.vectorFields import LinearField


@pytest.fixture
def grid16():
    return make_grid(16)


def test_connecting_path_reaches_target(sin2):
    grid = make_grid(64)
    x, y = np.array([0.1, 0.2]), np.array([0.4, -0.1])
    h = connecting_path(x, y, sin2, grid)
    np.testing.assert_allclose(h.start, 0.0)
    assert np.linalg.norm(ito_map(x, h, sin2).endpoint - y) < 1e-3


def test_connecting_path_identity(identity1, grid16):
    h = connecting_path([0.0], [0.5], identity1, grid16)
    np.testing.assert_allclose(h.scalar(), 0.5 * grid16.nodes, atol=1e-15)
    upper = distance_upper([0.0], [0.5], identity1, grid16, 0.75)
    assert upper >= 0.5


def test_connecting_path_needs_ellipticity(grid16):
    with pytest.raises(EllipticityError, match='singular'):
        connecting_path([0.0], [0.5], LinearField(1.0), grid16)


@pytest.mark.parametrize('H', [0.5, 0.75])
def test_identity_distance_is_euclidean(identity1, grid16, H):
    result = distance_optimize([0.0], [0.5], identity1, grid16, H)
    assert result.converged
    assert result.endpoint_residual < 1e-4
    assert result.ratio == pytest.approx(1.0, abs=1e-3)
    assert result.optimized <= result.upper_bound + 1e-9
    np.testing.assert_allclose(result.path.end, [0.5], atol=1e-4)


def test_scalar_distance_matches_oracle(sin1):
    grid = make_grid(32)
    result = distance_optimize([0.3], [0.55], sin1, grid, 0.5)
    oracle = scalar_distance_oracle([0.3], [0.55], sin1)
    assert result.optimized == pytest.approx(oracle, rel=1e-3)


def test_scalar_oracle():
    V = LinearField(1.0)
    assert scalar_distance_oracle([1.0], [np.e], V) == pytest.approx(1.0)


def test_scalar_oracle_needs_scalar_fields(sin2):
    with pytest.raises(ValueError, match='N = d = 1'):
        scalar_distance_oracle([0.0, 0.0], [1.0, 0.0], sin2)


def test_zero_gap(identity1, grid16):
    result = distance_optimize([0.2], [0.2], identity1, grid16, 0.6)
    assert result.optimized == 0.0
    assert np.isnan(result.ratio)


def test_distance_is_local(identity1, grid16):
    with pytest.raises(ValueError, match='local'):
        distance_optimize([0.0], [1.5], identity1, grid16, 0.6)


def test_unconverged_run_warns(sin1, grid16):
    opts = OptimizeOptions(rho_ladder=(1.0,), maxiter=2)
    with pytest.warns(UserWarning, match='endpoint tolerance'):
        result = distance_optimize([0.0], [0.5], sin1, grid16, 0.75, opts)
    assert not result.converged


def test_unit_directions():
    np.testing.assert_array_equal(unit_directions(2, 4),
                                  [[1, 0], [-1, 0], [0, 1], [0, -1]])
    extra = unit_directions(1, 3, seed=5)
    assert extra.shape == (3, 1)
    np.testing.assert_allclose(np.abs(extra), 1.0)
    np.testing.assert_array_equal(extra, unit_directions(1, 3, seed=5))
    with pytest.raises(ValueError, match='directions'):
        unit_directions(2, 0)


def test_identity_sweep(identity1, grid16):
    table = comparison_sweep([0.0], [0.5, 0.1], 2, identity1, 0.75, grid16)
    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 4
    assert list(table['r']) == [0.5, 0.5, 0.1, 0.1]
    np.testing.assert_allclose(table['ratio'], 1.0, atol=1e-3)
    assert table.attrs['C'] == pytest.approx(1.0, abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize('H', [0.5, 0.75])
def test_sin_perturbed_sweep(sin1, H):
    table = comparison_sweep([0.3], [0.5, 0.25, 0.1, 0.05], 2, sin1, H,
                             make_grid(32))
    assert table['converged'].all()
    assert table['residual'].max() < 1e-4
    assert table.attrs['C'] <= 1.3


@pytest.mark.slow
def test_sweep_does_not_depend_on_threads(sin1, grid16):
    serial = comparison_sweep([0.0], [0.25, 0.1], 2, sin1, 0.6, grid16)
    pooled = comparison_sweep([0.0], [0.25, 0.1], 2, sin1, 0.6, grid16,
                              threads=2)
    np.testing.assert_array_equal(serial['optimized'], pooled['optimized'])


def test_asymmetry_report(sin1, grid16):
    table = asymmetry_report([0.0], [0.4], sin1, grid16, 0.75)
    assert list(table['direction']) == ['x->y', 'y->x']
    assert table.attrs['difference'] == pytest.approx(
        table['optimized'].iloc[0] - table['optimized'].iloc[1])
