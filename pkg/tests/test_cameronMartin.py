import numpy as np
import pytest
from scipy import integrate

from fbmdensity.cameronMartin import (K_INVERSE, calibrate_constant,
                                      cm_norm, cm_norm_kinv, cm_norm_many,
                                      embedding_ratio, holder_norm,
                                      kernel_constant, kernel_constant_star,
                                      kinv, operator_K, operator_Kstar,
                                      pairing, representer, surjectivity_table,
                                      variation_norm, w12_norm)
from fbmdensity.core import Path, make_grid, rng_stream
from fbmdensity.exceptions import CapabilityError
from fbmdensity.fbm import gram, kernel_matrix, sample_array
from fbmdensity.malliavin import random_smooth_path


def test_kernel_constants():
    assert kernel_constant(0.5) == 1.0
    assert kernel_constant(0.75) ** 2 == pytest.approx(0.94, abs=1e-4)
    assert kernel_constant_star(0.25) == pytest.approx(kernel_constant(0.25),
                                                       rel=1e-12)
    assert kernel_constant_star(0.75) == kernel_constant(0.75)


@pytest.mark.parametrize('H', [0.35, 0.75])
def test_calibrated_constant_is_close_to_closed_form(H):
    assert calibrate_constant(H) == pytest.approx(kernel_constant(H),
                                                  rel=0.1)


def test_K_reduces_to_integration(grid64):
    phi = Path(grid64, np.cos(3 * grid64.nodes))
    expected = integrate.cumulative_trapezoid(phi.scalar(), dx=grid64.dt,
                                              initial=0)
    np.testing.assert_allclose(operator_K(phi, 0.5).scalar(), expected,
                               atol=1e-12)


def test_K_of_one_at_three_quarters():
    grid = make_grid(256)
    out = operator_K(Path(grid, np.ones(257)), 0.75)
    assert out.start[0] == 0.0
    assert out.end[0] == pytest.approx(0.9505, rel=1e-2)


@pytest.mark.parametrize('H', [0.35, 0.75])
def test_K_matches_cholesky_kernel(H):
    grid = make_grid(128)
    nodes = grid.nodes
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    phi = np.cos(np.pi * nodes)
    ours = operator_K(Path(grid, phi), H, constant='fitted').scalar()[1:]
    oracle = np.sqrt(grid.dt) * gram(grid, H).chol @ np.cos(np.pi * mids)
    assert np.linalg.norm(ours - oracle) / np.linalg.norm(oracle) < 0.1


def test_Kstar(grid64):
    f = Path(grid64, np.exp(grid64.nodes))
    assert operator_Kstar(f, 0.5) is f
    young = operator_Kstar(f, 0.75).scalar()
    assert np.isnan(young[0]) and np.all(np.isfinite(young[1:]))
    rough = operator_Kstar(f, 0.3).scalar()
    assert np.isnan(rough[0]) and np.isnan(rough[-1])


def test_surjectivity_table():
    table = surjectivity_table(1.0, 0.25, make_grid(256))
    assert list(table.columns) == ['t', 'computed', 'exact', 'rel_err']
    assert table.loc[table['t'] <= 0.9, 'rel_err'].max() < 0.05
    with pytest.raises(ValueError, match='H < 1/2'):
        surjectivity_table(1.0, 0.75, make_grid(16))


def test_brownian_norm_is_dirichlet_energy(smooth_path):
    energy = np.sum(smooth_path.increments() ** 2) / smooth_path.grid.dt
    assert cm_norm(smooth_path, 0.5).value ** 2 == pytest.approx(energy,
                                                                 abs=1e-10)


def test_norm_of_linear_path():
    grid = make_grid(128)
    h = Path(grid, grid.nodes)
    continuum = cm_norm(h, 0.75, method=K_INVERSE).value
    assert continuum == pytest.approx(1.00846, rel=1e-4)
    on_grid = cm_norm(h, 0.75).value
    assert 1.0 <= on_grid <= continuum + 1e-6


def test_kinv_path():
    grid = make_grid(64)
    out = kinv(Path(grid, grid.nodes), 0.75).scalar()
    assert np.isnan(out[0])
    # K^-1 t is a multiple of t^(1/2-H)
    np.testing.assert_allclose(out[1:] * grid.nodes[1:] ** 0.25,
                               out[-1], rtol=1e-10)


def test_kinv_norm_capability(smooth_path):
    with pytest.raises(CapabilityError, match='H > 1/2'):
        cm_norm(smooth_path, 0.4, method=K_INVERSE)
    with pytest.raises(ValueError, match='method'):
        cm_norm(smooth_path, 0.4, method='bogus')


def test_norm_needs_origin(grid64):
    with pytest.raises(ValueError, match='vanish at t=0'):
        cm_norm(Path(grid64, np.ones(65)), 0.6)


def test_norm_grows_with_refinement():
    levels = (16, 32, 64, 128)
    for H in (0.35, 0.75):
        norms = []
        for n in levels:
            grid = make_grid(n)
            t = grid.nodes
            norms.append(cm_norm(Path(grid, np.sin(2 * t) + t ** 3), H).value)
        assert np.all(np.diff(norms) >= -1e-9)


def test_norm_many_matches_single(grid64):
    t = grid64.nodes
    values = np.stack([np.column_stack([t, np.sin(t)]),
                       np.column_stack([t ** 2, -t])])
    many = cm_norm_many(values, grid64, 0.6)
    single = [cm_norm(Path(grid64, v), 0.6).value for v in values]
    np.testing.assert_allclose(many, single, rtol=1e-12)


def test_representer_norm(grid64):
    c = np.array([0.6, 0.8])
    h = representer(grid64, 0.7, c)
    np.testing.assert_allclose(h.end, c)
    assert cm_norm(h, 0.7).value == pytest.approx(1.0, rel=1e-8)


def test_path_norms():
    grid = make_grid(4)
    ramp = Path(grid, grid.nodes)
    assert w12_norm(ramp) == pytest.approx(1.0)
    assert variation_norm(ramp, 1) == pytest.approx(1.0)
    assert variation_norm(ramp, 2) == pytest.approx(1.0)
    assert holder_norm(ramp, 1.0) == pytest.approx(1.0)
    assert holder_norm(ramp, 0.5) == pytest.approx(1.0)
    zigzag = Path(grid, [0.0, 1.0, 0.0, 1.0, 0.0])
    assert variation_norm(zigzag, 1) == pytest.approx(4.0)
    assert variation_norm(zigzag, 2) == pytest.approx(2.0)
    with pytest.raises(ValueError, match='q must be'):
        variation_norm(ramp, 0.5)
    assert pairing(ramp, ramp) == pytest.approx(0.375)


def test_embedding_ratio(smooth_path):
    assert embedding_ratio(smooth_path, 0.4) > 0
    with pytest.warns(UserWarning, match='H < 1/2'):
        assert embedding_ratio(smooth_path, 0.5) == pytest.approx(1.0)


def test_kinv_norm_is_continuous_at_brownian_limit():
    grid = make_grid(256)
    h = Path(grid, grid.nodes)
    assert cm_norm_kinv(h, 0.5 + 1e-6).value == pytest.approx(1.0, abs=1e-3)
    assert cm_norm_kinv(h, 0.75).value == pytest.approx(
        cm_norm(h, 0.75).value, rel=2e-2)


def test_operator_K_matches_cholesky_kernel():
    grid = make_grid(256)
    K1 = operator_K(Path(grid, np.ones(257)), 0.75).end[0]
    row_integral = kernel_matrix(grid, 0.75)[-1].sum() * grid.dt
    assert K1 == pytest.approx(row_integral, rel=2e-2)


@pytest.mark.parametrize('H', [0.35, 0.75])
def test_Kstar_of_indicator_is_kernel_row(H):
    grid = make_grid(256)
    i = 128
    # hat equal to 1 on [0, t_i], dropping to 0 over the next cell
    hat = np.clip(i + 1 - np.arange(257), 0, 1).astype(float)
    values = operator_Kstar(Path(grid, hat), H).scalar()
    cells = 0.5 * (values[:-1] + values[1:])[:i]
    row = kernel_matrix(grid, H)[i - 1, :i]
    rel = np.abs(cells / row - 1)
    assert np.median(rel[np.isfinite(rel)]) <= 5e-2


@pytest.mark.slow
def test_pairing_with_fbm_is_centred():
    grid = make_grid(64)
    h = representer(grid, 0.7, np.array([1.0]))
    samples = sample_array(grid, 0.7, 1, 100000, seed=8)
    values = np.array([pairing(Path(grid, f), h) for f in samples])
    se = values.std(ddof=1) / np.sqrt(len(values))
    assert abs(values.mean()) <= 3 * se


def test_embedding_constant_bounds_the_family():
    H = 0.35
    ratios = []
    for seed, n in ((1, 64), (2, 128)):
        grid = make_grid(n)
        rng = rng_stream(seed, 0)
        ratios.append([embedding_ratio(random_smooth_path(grid, 1, rng), H)
                       for _ in range(50)])
    fitted, other = np.array(ratios[0]), np.array(ratios[1])
    C = fitted.max()
    assert np.all(fitted > 0) and np.isfinite(C)
    assert np.all(other <= 1.1 * C)
