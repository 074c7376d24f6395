"""Acceptance suite run by the ``verify`` command.

Each check returns one row (check, passed, value, target, detail); the
suite passes when every row does.
"""
import filecmp
import logging
import os
import tempfile
import time

import numpy as np
import pandas as pd
from scipy import integrate, special
from scipy.stats import norm

from fbmdensity import fracCalc
from fbmdensity.cameronMartin import cm_norm, operator_K, operator_Kstar
from fbmdensity.core import Path, make_grid, rng_stream
from fbmdensity.density import lower_bound_check, scaling_check
from fbmdensity.distance import comparison_sweep
from fbmdensity.fbm import (empirical_covariance_report, family_sigmas,
                            sample_array)
from fbmdensity.malliavin import nondegeneracy_scan
from fbmdensity.vectorFields import registry_build

logger = logging.getLogger(__name__)

VERIFY_COLUMNS = ['check', 'passed', 'value', 'target', 'detail']


def _row(check, passed, value, target, detail=''):
    return {'check': check, 'passed': bool(passed), 'value': float(value),
            'target': float(target), 'detail': detail}


def check_fbm_covariance(seed, threads=1, count=100000, n=16):
    """Empirical covariance of sampled paths against R(s, t)."""
    grid = make_grid(n)
    worst, ok = 0.0, True
    for stream, H in enumerate((0.35, 0.5, 0.75)):
        samples = sample_array(grid, H, 1, count, seed, stream=stream,
                               threads=threads)
        report = empirical_covariance_report(samples, grid, H)
        worst = max(worst, float(report['z'].max()))
        ok = ok and bool(report['within'].all())
    return _row('fbm-covariance', ok, worst,
                family_sigmas(n * (n + 1) // 2),
                'max z-score over H in {0.35, 0.5, 0.75}')


def check_fraccalc():
    """Closed forms of I^a and D^a on powers, and D^a I^a = id."""
    errors = []
    for n in (256, 512):
        grid = make_grid(n)
        value = fracCalc.frac_int_left(Path(grid, np.ones(n + 1)), 0.5)
        errors.append(abs(value.end[0] - 1 / special.gamma(1.5)) / 1e-3)
        value = fracCalc.frac_int_left(Path(grid, grid.nodes), 0.5)
        errors.append(abs(value.end[0] - 1 / special.gamma(2.5)) / 1e-3)
    fine = make_grid(512)
    root = fracCalc.frac_deriv_left(Path(fine, np.sqrt(fine.nodes)), 0.5)
    away = fine.nodes >= 0.1
    errors.append(np.max(np.abs(root.scalar()[away]
                                - special.gamma(1.5))) / 2e-2)
    wave = Path(fine, np.sin(2 * np.pi * fine.nodes))
    back = fracCalc.frac_deriv_left(fracCalc.frac_int_left(wave, 0.5), 0.5)
    errors.append(np.nanmax(np.abs(back.scalar() - wave.scalar())) / 5e-2)
    worst = float(max(errors))
    return _row('fraccalc-closed-forms', worst <= 1, worst, 1.0,
                'largest error relative to its tolerance')


def check_brownian_reductions(n=64):
    """At H = 1/2: K is integration, K* the identity and the norm the
    Dirichlet energy."""
    grid = make_grid(n)
    phi = Path(grid, np.cos(3 * grid.nodes))
    integral = integrate.cumulative_trapezoid(phi.scalar(), dx=grid.dt,
                                              initial=0)
    err_k = np.max(np.abs(operator_K(phi, 0.5).scalar() - integral))
    err_star = np.max(np.abs(operator_Kstar(phi, 0.5).scalar()
                             - phi.scalar()))
    h = Path(grid, np.sin(2 * grid.nodes) + grid.nodes ** 2)
    energy = np.sum(h.increments() ** 2) / grid.dt
    err_norm = abs(cm_norm(h, 0.5).value ** 2 - energy)
    worst = float(max(err_k, err_star, err_norm))
    return _row('brownian-reductions', worst <= 1e-10, worst, 1e-10)


def _smooth_family(seed, count, terms=6):
    rng = rng_stream(seed, 21)
    coeffs = rng.standard_normal((count, terms)) / np.arange(1, terms + 1)
    freq = (np.arange(1, terms + 1) - 0.5) * np.pi
    return lambda nodes: np.sin(np.outer(nodes, freq)) @ coeffs.T


def check_rkhs_monotonicity(seed, count=20, levels=(16, 32, 64, 128)):
    """cm_norm does not decrease along nested grids."""
    family = _smooth_family(seed, count)
    worst = -np.inf
    for H in (0.35, 0.75):
        norms = []
        for n in levels:
            grid = make_grid(n)
            values = family(grid.nodes)
            norms.append([cm_norm(Path(grid, values[:, i]), H).value
                          for i in range(count)])
        drops = -np.diff(np.array(norms), axis=0)
        worst = max(worst, float(drops.max()))
    return _row('rkhs-monotonicity', worst <= 1e-9, worst, 1e-9,
                'largest decrease between nested grids')


def check_distance_identity(threads=1):
    V = registry_build('identity', {}, 1)
    worst = 0.0
    for H in (0.5, 0.75):
        table = comparison_sweep([0.0], [0.5, 0.25, 0.1], 2, V, H,
                                 make_grid(32), threads=threads)
        worst = max(worst, float((table['ratio'] - 1).abs().max()))
    return _row('distance-identity', worst <= 0.01, worst, 0.01,
                '|ratio - 1| for V = Id')


def check_distance_sin(threads=1):
    V = registry_build('sin-perturbed', {'epsilon': 0.1}, 1)
    C, residual = 0.0, 0.0
    for H in (0.5, 0.75):
        table = comparison_sweep([0.3], [0.5, 0.25, 0.1, 0.05], 2, V, H,
                                 make_grid(32), threads=threads)
        C = max(C, table.attrs['C'])
        residual = max(residual, float(table['residual'].max()))
    return _row('distance-sin-perturbed', C <= 1.3 and residual < 1e-4, C,
                1.3, 'max endpoint residual {0:.3g}'.format(residual))


def check_nondegeneracy(seed, threads=1, count=200, M=2.0, scans=None):
    """det Gamma over Cameron-Martin balls of radius M for the registered
    families; each ScanResult is stored in ``scans[(family, H)]`` when a
    dict is given."""
    families = (('identity', {}), ('const-sigma', {'sigma': 1.5,
                                                   'shear': 0.5}),
                ('sin-perturbed', {'epsilon': 0.1}))
    det_min, identity_gap, spread = np.inf, 0.0, 0.0
    for name, params in families:
        V = registry_build(name, params, 2)
        for H in (0.75, 0.4):
            scan = nondegeneracy_scan([0.0, 0.0], V, H, M, count, seed,
                                      make_grid(64), threads)
            if scans is not None:
                scans[(name, H)] = scan
            det_min = min(det_min, scan.det_min)
            spread = max(spread, scan.det_max / scan.det_min)
            if name == 'identity':
                identity_gap = max(identity_gap,
                                   abs(scan.det_max - 1),
                                   abs(scan.det_min - 1))
    passed = det_min > 0 and identity_gap <= 1e-6 and spread <= 10
    return _row('nondegeneracy-scan', passed, det_min, 0.0,
                'identity |det - 1| = {0:.3g}, det_max / det_min <= {1:.3g}'
                .format(identity_gap, spread))


def check_density_identity(seed, threads=1, count=100000):
    V = registry_build('identity', {}, 1)
    table = lower_bound_check([0.0], [1.0], V, 0.5, [0.5, 0.25, 0.125],
                              count, seed, make_grid(64), threads)
    exact = norm.pdf(1.0)
    worst = float((table['phat_times_tNH'] / exact - 1).abs().max())
    return _row('density-identity', worst <= 0.05, worst, 0.05,
                'relative error against (2 pi)^-1/2 e^-1/2')


def check_density_sin(seed, threads=1, count=100000):
    V = registry_build('sin-perturbed', {'epsilon': 0.1}, 1)
    passed, worst = True, np.inf
    for H in (0.4, 0.75):
        table = lower_bound_check([0.0], [1.0], V, H, [0.5, 0.25, 0.125],
                                  count, seed, make_grid(64), threads)
        passed = passed and table.attrs['passed']
        worst = min(worst, table.attrs['last_first'])
    return _row('density-lower-bound', passed, worst, 0.5,
                'smallest last/first ratio of phat t^NH')


def check_scaling(seed, threads=1, count=10000):
    V = registry_build('sin-perturbed', {'epsilon': 0.1}, 1)
    table = scaling_check(0.25, [0.0], V, 0.75, count, seed, make_grid(64),
                          threads=threads)
    return _row('scaling-identity', table['within'].all(),
                float(table['z'].max()), 3.0, 'max z-score of moments')


def check_determinism(seed):
    """Two fbm-sim runs with the same seed write identical bytes."""
    from fbmdensity.base import Experiment
    from fbmdensity.config import ExperimentConfig
    with tempfile.TemporaryDirectory() as root:
        dirs = [os.path.join(root, name) for name in ('a', 'b')]
        for path in dirs:
            config = ExperimentConfig(hurst=0.75, grid_n=8, count=500,
                                      seed=seed, out_dir=path,
                                      export_paths=3)
            Experiment(config).fbm_sim()
        names = sorted(os.listdir(dirs[0]))
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names,
                                                   shallow=False)
    same = not mismatch and not errors and len(match) == len(names)
    return _row('determinism', same, len(mismatch) + len(errors), 0.0,
                'files compared: {0}'.format(', '.join(names)))


def run_acceptance(seed=42, threads=1, M=2.0, scans=None):
    """Run every check and return the summary table.

    ``M`` is the radius of the nondegeneracy scans, whose tables land in
    ``scans`` when a dict is given.
    """
    checks = [
        lambda: check_fbm_covariance(seed, threads),
        check_fraccalc,
        check_brownian_reductions,
        lambda: check_rkhs_monotonicity(seed),
        lambda: check_distance_identity(threads),
        lambda: check_distance_sin(threads),
        lambda: check_nondegeneracy(seed, threads, M=M, scans=scans),
        lambda: check_density_identity(seed, threads),
        lambda: check_density_sin(seed, threads),
        lambda: check_scaling(seed, threads),
        lambda: check_determinism(seed),
    ]
    rows = []
    for check in checks:
        start = time.time()
        row = check()
        logger.info('%s: %s in %.1f s', row['check'],
                    'ok' if row['passed'] else 'FAILED', time.time() - start)
        rows.append(row)
    return pd.DataFrame(rows, columns=VERIFY_COLUMNS)
