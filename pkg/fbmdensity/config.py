"""Experiment configuration: a JSON file merged over the defaults, with
command-line flags on top."""
import dataclasses
import json
import logging
import os
from dataclasses import dataclass

from fbmdensity.exceptions import ConfigError
from fbmdensity.inputChecks import (countCheck, hurstCheck, positiveIntCheck,
                                    radiiCheck, sdeHurstCheck, timeCheck)
from fbmdensity.vectorFields import REGISTRY

logger = logging.getLogger(__name__)

this_dir, this_filename = os.path.split(__file__)
BASE_DIR = os.path.dirname(this_dir)
DEFAULT_CONFIG_PATH = os.path.join(BASE_DIR, 'utils', 'default_config.json')

COMMANDS = ('fbm-sim', 'distance', 'density', 'verify')

REQUIRED = {
    'fbm-sim': ('hurst', 'grid_n', 'count', 'seed'),
    'distance': ('hurst', 'grid_n', 'field', 'x', 'radii'),
    'density': ('hurst', 'field', 'x', 't_list', 'count', 'seed'),
    'verify': ('seed',),
}

# commands that drive the SDE solvers
SDE_COMMANDS = ('density',)


@dataclass
class ExperimentConfig(object):
    """Parameters of one experiment run.

    Attributes
    ----------
        hurst : float
        grid_n : int
            Steps of the uniform grid on [0, 1].
        field, field_params : str, dict
            Registered vector field family and its parameters.
        x, y : list of float
            Start and target points; y defaults to x + e_1 / 2.
        radii, directions :
            Radii and direction count of the distance sweep.
        t_list, count, seed :
            Times, sample count and seed of the density runs.
        M : float
            Cameron-Martin radius of the nondegeneracy scan.
    """
    hurst: float = 0.75
    grid_n: int = 64
    field: str = 'identity'
    field_params: dict = dataclasses.field(default_factory=dict)
    x: list = dataclasses.field(default_factory=lambda: [0.0])
    y: list = None
    radii: list = dataclasses.field(
        default_factory=lambda: [0.5, 0.25, 0.1, 0.05])
    directions: int = 2
    t_list: list = dataclasses.field(
        default_factory=lambda: [0.5, 0.25, 0.125, 0.0625])
    count: int = 10000
    seed: int = 42
    threads: int = 1
    out_dir: str = 'out'
    M: float = 2.0
    batch_size: int = 10000
    export_paths: int = 1
    varadhan: bool = False

    @property
    def N(self):
        return len(self.x)

    @property
    def target(self):
        if self.y is not None:
            return list(self.y)
        return [self.x[0] + 0.5] + list(self.x[1:])

    def to_dict(self):
        return dataclasses.asdict(self)

    def validate(self, command=None):
        """Check every field; raises ValueError naming the field."""
        if command is not None and command not in COMMANDS:
            raise ConfigError('Unknown command {0!r}; choose between '
                              '{1}.'.format(command, ', '.join(COMMANDS)))
        hurstCheck(self.hurst)
        if command in SDE_COMMANDS:
            sdeHurstCheck(self.hurst)
        positiveIntCheck(self.grid_n, 'grid_n')
        countCheck(self.count, 'count')
        positiveIntCheck(self.directions, 'directions')
        positiveIntCheck(self.threads, 'threads')
        positiveIntCheck(self.batch_size, 'batch_size')
        countCheck(self.export_paths, 'export_paths')
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) \
                or self.seed < 0:
            raise ConfigError('seed must be a non-negative integer; got '
                              '{0!r}.'.format(self.seed))
        if self.field not in REGISTRY:
            raise ConfigError('field must be one of {0}; got {1!r}.'.format(
                sorted(REGISTRY), self.field))
        if not isinstance(self.field_params, dict):
            raise ConfigError('field_params must be a mapping; got '
                              '{0!r}.'.format(self.field_params))
        if not self.x:
            raise ConfigError('x must hold at least one coordinate.')
        if self.y is not None and len(self.y) != len(self.x):
            raise ConfigError('y must have the dimension of x ({0}); got '
                              '{1}.'.format(len(self.x), len(self.y)))
        radiiCheck(self.radii)
        for t in self.t_list:
            timeCheck(t, 't_list')
        if not self.M > 0:
            raise ConfigError('M must be positive; got {0}.'.format(self.M))
        return self


DEFAULTS = ExperimentConfig().to_dict()


def read_config_file(path):
    """Load a JSON config file, rejecting unknown keys."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except json.JSONDecodeError as err:
        raise ConfigError('Config file {0} is not valid JSON: {1}'.format(
            path, err))
    if not isinstance(data, dict):
        raise ConfigError('Config file {0} must hold a JSON object.'.format(
            path))
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ConfigError('Unknown config key(s) {0} in {1}.'.format(
            unknown, path))
    return data


def load_config(path=None, overrides=None, command=None):
    """Build an ExperimentConfig.

    Parameters
    ----------
        path : str, optional
            JSON file whose values replace the defaults. When given, every
            key the command requires must be set by the file or by the
            overrides.
        overrides : dict, optional
            Values from command-line flags; None entries are ignored.
        command : str, optional

    Returns
    -------
    ExperimentConfig
    """
    values = dict(DEFAULTS)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = sorted(set(overrides) - set(DEFAULTS))
    if unknown:
        raise ConfigError('Unknown option(s) {0}.'.format(unknown))
    if path is not None:
        data = read_config_file(path)
        if command is not None:
            for key in REQUIRED.get(command, ()):
                if key not in data and key not in overrides:
                    raise ConfigError('Config file {0} is missing the '
                                      'required key {1!r} for {2}.'.format(
                                          path, key, command))
        values.update(data)
        logger.debug('loaded config %s', path)
    values.update(overrides)
    return ExperimentConfig(**values)
