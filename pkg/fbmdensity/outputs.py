"""CSV and SVG writers. Files carry no wall-clock data, so identical runs
give identical bytes."""
import logging
import os

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
FIGSIZE = (8, 6)
DPI = 100

plt.rcParams['svg.hashsalt'] = 'fbmdensity'
plt.rcParams['figure.figsize'] = FIGSIZE
plt.rcParams['figure.dpi'] = DPI


def _format(value):
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (list, tuple, np.ndarray)):
        return '[' + ', '.join(_format(v) for v in value) + ']'
    if isinstance(value, dict):
        return '{' + ', '.join('{0}={1}'.format(k, _format(v))
                               for k, v in sorted(value.items())) + '}'
    return str(value)


def metadata_lines(metadata):
    """'# key: value' lines in insertion order."""
    return ['# {0}: {1}'.format(key, _format(value))
            for key, value in (metadata or {}).items()]


def write_csv(frame, path, metadata=None):
    """Write ``frame`` after the metadata comment lines.

    Parameters
    ----------
        frame : pandas.DataFrame
        path : str
        metadata : dict, optional

    Returns
    -------
    str
        The path written.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='') as handle:
        for line in metadata_lines(metadata):
            handle.write(line + '\n')
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT)
    logger.info('wrote %s (%d rows)', path, len(frame))
    return path


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    logger.info('wrote %s', path)
    return path


def ratio_plot(table, path, title=''):
    """Scatter of distance ratio against radius (log x), one series per
    direction."""
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for index, group in table.groupby('dir_index'):
        ax.plot(group['r'], group['ratio'], marker='o', linestyle='-',
                label='direction {0}'.format(index))
    ax.set_xscale('log')
    ax.axhline(1.0, color='grey', linewidth=0.8)
    ax.set_xlabel('radius |y - x|')
    ax.set_ylabel('optimized distance / |y - x|')
    ax.set_title(title)
    if len(table):
        ax.legend()
    return _save(fig, path)


def density_error_bars(table):
    """3 standard errors on the phat t^(NH) scale; 0 where phat is 0."""
    phat = table['phat'].to_numpy(dtype=float)
    scale = np.divide(table['phat_times_tNH'].to_numpy(dtype=float), phat,
                      out=np.zeros_like(phat), where=phat > 0)
    return 3 * table['stderr'].to_numpy(dtype=float) * scale


def density_plot(table, path, title=''):
    """Polyline of phat t^(NH) against t (log x)."""
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.errorbar(table['t'], table['phat_times_tNH'],
                yerr=density_error_bars(table), marker='o', capsize=3)
    ax.set_xscale('log')
    ax.set_xlabel('t')
    ax.set_ylabel('phat(t, x, y) t^(NH)')
    ax.set_ylim(bottom=0)
    ax.set_title(title)
    return _save(fig, path)
