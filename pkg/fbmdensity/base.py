import logging
import os

import numpy as np

import fbmdensity
from fbmdensity.cameronMartin import calibrate_constant, kernel_constant
from fbmdensity.config import ExperimentConfig
from fbmdensity.core import Path, make_grid
from fbmdensity.density import lower_bound_check, varadhan_diagnostic
from fbmdensity.distance import asymmetry_report, comparison_sweep
from fbmdensity.fbm import (empirical_covariance_report, paths_to_frame,
                            sample_array)
from fbmdensity.outputs import density_plot, ratio_plot, write_csv
from fbmdensity.vectorFields import registry_build

logger = logging.getLogger(__name__)

##############################
# Core experiment class
##############################


class Experiment(object):
    """Experiment object

        Runs one configured experiment and writes its CSV and SVG files.

        Parameters
        ----------
        config : ExperimentConfig, optional
            Defaults to ``ExperimentConfig()``.
        threads : int, optional
            Worker processes; overrides ``config.threads``.

        Attributes
        ----------
        config : ExperimentConfig
        threads : int
        written : list of str
            Files written so far, in order.

        Examples
        --------
        >>> from fbmdensity import Experiment, ExperimentConfig
        >>> config = ExperimentConfig(hurst=0.5, grid_n=16, count=10000,
        ...                           out_dir='out')
        >>> report = Experiment(config).fbm_sim()
        >>> bool(report['within'].all())
        True

        Notes
        ------
        The constants of the small-time bounds are existential; the
        distance and density commands certify positivity and stability
        of the computed ratios and record the fitted values in the file
        headers.
        """

    def __init__(self, config=None, threads=None):
        self.config = config if config is not None else ExperimentConfig()
        self.threads = int(threads if threads is not None
                           else self.config.threads)
        self.written = []

    @property
    def grid(self):
        return make_grid(self.config.grid_n)

    def field(self):
        """The configured vector field family, sized to len(x)."""
        return registry_build(self.config.field, self.config.field_params,
                              N=self.config.N)

    def metadata(self, command, **extra):
        """Header lines shared by every output file."""
        config = self.config
        meta = {'command': command, 'version': fbmdensity.__version__,
                'hurst': float(config.hurst), 'grid_n': config.grid_n,
                'seed': config.seed}
        if command != 'fbm-sim':
            meta['field'] = config.field
            meta['field_params'] = dict(config.field_params)
            meta['x'] = [float(v) for v in config.x]
        meta.update(extra)
        return meta

    def _path(self, name):
        return os.path.join(self.config.out_dir, name)

    def _csv(self, frame, name, metadata):
        self.written.append(write_csv(frame, self._path(name), metadata))

    def fbm_sim(self):
        """Sample fBm paths; write ``paths.csv`` and ``cov_report.csv``.

        Returns
        -------
        pandas.DataFrame
            The covariance report.
        """
        config = self.config.validate('fbm-sim')
        grid = self.grid
        samples = sample_array(grid, config.hurst, 1, config.count,
                               config.seed, batch_size=config.batch_size,
                               threads=self.threads)
        keep = samples[:config.export_paths]
        frame = paths_to_frame([Path(grid, values) for values in keep])
        meta = self.metadata('fbm-sim', count=config.count,
                             exported=len(keep))
        self._csv(frame, 'paths.csv', meta)
        report = empirical_covariance_report(samples, grid, config.hurst)
        meta['max_z'] = float(report['z'].max())
        self._csv(report, 'cov_report.csv', meta)
        logger.info('fbm-sim: %d of %d covariance entries within tolerance',
                    int(report['within'].sum()), len(report))
        return report

    def distance(self):
        """Radius sweep of the optimized control distance; writes
        ``distance.csv`` and ``distance.svg``, plus ``asymmetry.csv`` when a
        target point y is configured."""
        config = self.config.validate('distance')
        V = self.field()
        grid = self.grid
        table = comparison_sweep(config.x, config.radii, config.directions,
                                 V, config.hurst, grid, threads=self.threads,
                                 seed=config.seed)
        meta = self.metadata(
            'distance', radii=[float(r) for r in config.radii],
            directions=config.directions,
            kernel_constant=kernel_constant(config.hurst),
            calibrated_constant=calibrate_constant(float(config.hurst)),
            C=table.attrs.get('C', float('nan')),
            note='C is fitted so that 1/C <= ratio <= C over the sweep')
        self._csv(table, 'distance.csv', meta)
        self.written.append(ratio_plot(
            table, self._path('distance.svg'),
            'H = {0:g}, field = {1}'.format(config.hurst, config.field)))
        if config.y is not None:
            report = asymmetry_report(config.x, config.target, V, grid,
                                      config.hurst)
            self._csv(report, 'asymmetry.csv', self.metadata(
                'distance', y=[float(v) for v in config.target],
                difference=report.attrs['difference']))
        return table

    def density(self):
        """Small-time density lower bound along x + t^H e_1; writes
        ``density.csv`` and ``density.svg``, plus ``varadhan.csv`` when
        ``config.varadhan`` is set."""
        config = self.config.validate('density')
        V = self.field()
        u = np.zeros(config.N)
        u[0] = 1.0
        table = lower_bound_check(config.x, u, V, config.hurst,
                                  config.t_list, config.count, config.seed,
                                  self.grid, self.threads)
        meta = self.metadata(
            'density', count=config.count,
            t_list=[float(t) for t in config.t_list],
            min_lower=table.attrs.get('min_lower', float('nan')),
            last_first=table.attrs.get('last_first', float('nan')),
            passed=table.attrs.get('passed', False),
            note='positivity and stability only; the bound constants are '
                 'not computable')
        self._csv(table, 'density.csv', meta)
        self.written.append(density_plot(
            table, self._path('density.svg'),
            'H = {0:g}, field = {1}'.format(config.hurst, config.field)))
        if config.varadhan:
            report = varadhan_diagnostic(config.x, config.target, V,
                                         config.hurst, config.t_list,
                                         config.count, config.seed,
                                         self.grid, threads=self.threads)
            self._csv(report, 'varadhan.csv', self.metadata(
                'density', y=[float(v) for v in config.target],
                distance=report.attrs['distance'],
                note='diagnostic; convergence is not asserted'))
        return table

    def verify(self):
        """Run the acceptance suite; writes ``verify.csv`` and one
        ``scan_<family>_<H>.csv`` per nondegeneracy scan.

        Returns
        -------
        pandas.DataFrame
            One row per check; the run passed when ``passed`` is all True.
        """
        from fbmdensity.verify import run_acceptance
        config = self.config.validate('verify')
        scans = {}
        table = run_acceptance(config.seed, self.threads, M=config.M,
                               scans=scans)
        self._csv(table, 'verify.csv', {'command': 'verify',
                                        'version': fbmdensity.__version__,
                                        'seed': config.seed,
                                        'passed': bool(table['passed'].all())})
        for (family, H), scan in sorted(scans.items()):
            self._csv(scan.table, 'scan_{0}_{1:g}.csv'.format(family, H), {
                'command': 'verify', 'version': fbmdensity.__version__,
                'field': family, 'hurst': float(H), 'seed': config.seed,
                'M': float(config.M), 'det_min': scan.det_min,
                'det_max': scan.det_max, 'excluded': scan.excluded})
        return table

    def run(self, command):
        """Dispatch a CLI command name."""
        method = {'fbm-sim': self.fbm_sim, 'distance': self.distance,
                  'density': self.density, 'verify': self.verify}.get(command)
        if method is None:
            raise ValueError('Unknown command {0!r}.'.format(command))
        return method()
