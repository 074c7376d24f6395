import numpy as np
import pytest
from scipy import integrate, special

from fbmdensity import fracCalc
from fbmdensity.core import Path, make_grid
from fbmdensity.fracCalc import (FracOrder, apply_left, frac_deriv_left,
                                 frac_deriv_right, frac_int_left,
                                 frac_int_left_weighted, frac_int_right,
                                 int_weights, weighted_int_weights,
                                 weighted_integral)


@pytest.fixture
def grid():
    return make_grid(64)


@pytest.mark.parametrize('alpha', [0.25, 0.5, 1.3])
def test_integral_exact_on_linear_functions(grid, alpha):
    t = grid.nodes
    one = frac_int_left(Path(grid, np.ones_like(t)), alpha).scalar()
    ramp = frac_int_left(Path(grid, t), alpha).scalar()
    np.testing.assert_allclose(one, t ** alpha / special.gamma(alpha + 1),
                               atol=1e-12)
    np.testing.assert_allclose(ramp,
                               t ** (alpha + 1) / special.gamma(alpha + 2),
                               atol=1e-12)


@pytest.mark.parametrize('n', [256, 512])
def test_half_integral_endpoint_values(n):
    fine = make_grid(n)
    one = frac_int_left(Path(fine, np.ones(n + 1)), 0.5).end[0]
    ramp = frac_int_left(Path(fine, fine.nodes), 0.5).end[0]
    assert one == pytest.approx(1 / special.gamma(1.5), abs=1e-3)
    assert ramp == pytest.approx(1 / special.gamma(2.5), abs=1e-3)


def test_integral_of_order_one_is_trapezoid(grid):
    f = np.cos(3 * grid.nodes)
    out = frac_int_left(Path(grid, f), 1.0).scalar()
    expected = integrate.cumulative_trapezoid(f, dx=grid.dt, initial=0)
    np.testing.assert_allclose(out, expected, atol=1e-13)


def test_right_integral_is_reflected(grid):
    t = grid.nodes
    out = frac_int_right(Path(grid, np.ones_like(t)), 0.5).scalar()
    np.testing.assert_allclose(out, (1 - t) ** 0.5 / special.gamma(1.5),
                               atol=1e-12)


def test_semigroup():
    grid = make_grid(256)
    f = Path(grid, np.sin(np.pi * grid.nodes))
    twice = frac_int_left(frac_int_left(f, 0.3), 0.4).scalar()
    once = frac_int_left(f, 0.7).scalar()
    np.testing.assert_allclose(twice, once, atol=1e-3)


def test_weighted_integral_closed_form(grid):
    t = grid.nodes
    alpha, gamma = 0.25, -0.25
    out = frac_int_left_weighted(Path(grid, np.ones_like(t)), alpha, gamma)
    # alpha + gamma = 0: the value at t = 0 is the limit, not zero
    np.testing.assert_allclose(out.scalar(), special.gamma(0.75),
                               rtol=1e-10)
    out = frac_int_left_weighted(Path(grid, t), 0.5, 0.3).scalar()
    expected = special.gamma(2.3) / special.gamma(2.8) * t ** 1.8
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_weighted_weights_singular_row(grid):
    weights = weighted_int_weights(grid.n, 0.2, -0.4)
    assert np.all(np.isnan(weights[0]))
    with pytest.raises(ValueError, match='gamma > -1'):
        weighted_int_weights(grid.n, 0.2, -1.0)


@pytest.mark.parametrize('alpha', [0.2, 0.5, 0.8])
def test_derivative_exact_on_linear_functions(grid, alpha):
    t = grid.nodes
    one = frac_deriv_left(Path(grid, np.ones_like(t)), alpha).scalar()
    ramp = frac_deriv_left(Path(grid, t), alpha).scalar()
    assert np.isnan(one[0]) and np.isnan(ramp[0])
    np.testing.assert_allclose(one[1:], t[1:] ** -alpha
                               / special.gamma(1 - alpha), rtol=1e-9)
    np.testing.assert_allclose(ramp[1:], t[1:] ** (1 - alpha)
                               / special.gamma(2 - alpha), rtol=1e-9)


def test_right_derivative(grid):
    t = grid.nodes
    out = frac_deriv_right(Path(grid, 1 - t), 0.4).scalar()
    assert np.isnan(out[-1])
    np.testing.assert_allclose(out[:-1], (1 - t[:-1]) ** 0.6
                               / special.gamma(1.6), rtol=1e-9)


def test_derivative_inverts_integral():
    grid = make_grid(512)
    f = Path(grid, np.sin(2 * np.pi * grid.nodes))
    back = frac_deriv_left(frac_int_left(f, 0.5), 0.5).scalar()
    assert np.nanmax(np.abs(back - f.scalar())) < 5e-2


def test_derivative_of_square_root():
    grid = make_grid(512)
    out = frac_deriv_left(Path(grid, np.sqrt(grid.nodes)), 0.5).scalar()
    away = grid.nodes >= 0.1
    np.testing.assert_allclose(out[away], special.gamma(1.5), atol=2e-2)


def test_order_zero_is_identity(grid):
    f = Path(grid, grid.nodes ** 2)
    assert frac_int_left(f, 0) is f
    assert frac_deriv_left(f, 0.0) is f
    assert frac_int_right(f, FracOrder(0.0)) is f


def test_order_validation(grid):
    f = Path(grid, grid.nodes)
    with pytest.raises(ValueError, match='alpha must be >= 0'):
        frac_int_left(f, -0.5)
    with pytest.raises(ValueError, match='alpha in \\(0, 1\\)'):
        frac_deriv_left(f, 1.0)
    with pytest.raises(ValueError, match='scalar Path'):
        frac_int_left(grid.nodes, 0.5)


def test_weights_apply_to_batches(grid):
    values = np.column_stack([grid.nodes, grid.nodes ** 2])
    weights = int_weights(grid.n, 0.5)
    out = apply_left(weights, values)
    np.testing.assert_allclose(out[:, 1], weights @ values[:, 1])
    assert not weights.flags.writeable
    assert fracCalc.int_weights(grid.n, 0.5) is weights


def test_weighted_integral(grid):
    t = grid.nodes
    assert weighted_integral(np.ones_like(t), grid) == pytest.approx(1.0)
    assert weighted_integral(np.ones_like(t), grid, -0.5) \
        == pytest.approx(2.0)
    assert weighted_integral(t, grid, 0.5) == pytest.approx(1 / 2.5)
