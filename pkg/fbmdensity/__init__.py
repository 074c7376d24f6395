#!/usr/bin/env python

"""A library that checks local density and distance estimates for
differential equations driven by fractional Brownian motion"""
from __future__ import absolute_import

from fbmdensity.base import Experiment
from fbmdensity.config import ExperimentConfig, load_config
from fbmdensity.core import Hurst, Path, TimeGrid, make_grid
from fbmdensity.vectorFields import VectorFieldSet, registry_build

__name__ = 'fbmdensity'
__author__ = 'fbmdensity contributors'
__email__ = 'fbmdensity@users.noreply.github.com'
__license__ = 'GNU General Public License v3.0'
__version__ = '0.1.0'
__url__ = 'https://github.com/fbmdensity/fbmdensity'
__description__ = 'Numerical checks of control distance and density ' \
                  'lower bounds for SDEs driven by fractional Brownian ' \
                  'motion.'
