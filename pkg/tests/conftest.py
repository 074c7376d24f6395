import numpy as np
import pytest

from fbmdensity.core import Path, make_grid
from fbmdensity.vectorFields import registry_build


@pytest.fixture
def grid64():
    return make_grid(64)


@pytest.fixture
def identity1():
    return registry_build('identity', {}, 1)


@pytest.fixture
def sin1():
    return registry_build('sin-perturbed', {'epsilon': 0.1}, 1)


@pytest.fixture
def sin2():
    return registry_build('sin-perturbed', {'epsilon': 0.1}, 2)


@pytest.fixture
def smooth_path(grid64):
    """A Cameron-Martin path h(t) = sin(2t) + t^2 / 2, h(0) = 0."""
    t = grid64.nodes
    return Path(grid64, np.sin(2 * t) + 0.5 * t ** 2)


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / 'out')
