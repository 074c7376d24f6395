"""Command line front end: ``fbmdensity {fbm-sim,distance,density,verify}``.

Exit codes: 0 ok, 1 invalid input or configuration, 2 runtime failure,
3 failed verification.
"""
import argparse
import logging
import sys

import pandas as pd

from fbmdensity.base import Experiment
from fbmdensity.config import COMMANDS, load_config
from fbmdensity.exceptions import CapabilityError, FactorizationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3

# flag destination -> config key
FLAG_KEYS = ('hurst', 'grid_n', 'field', 'x', 'y', 'radii', 'directions',
             't_list', 'count', 'seed', 'threads', 'out_dir', 'M')


def field_param(text):
    """Parse one ``k=v`` pair with a numeric value."""
    key, sep, value = text.partition('=')
    if not sep or not key:
        raise argparse.ArgumentTypeError(
            'field parameters are written k=v; got {0!r}'.format(text))
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            'field parameter {0} needs a number; got {1!r}'.format(key,
                                                                  value))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON config file')
    common.add_argument('--hurst', type=float)
    common.add_argument('--grid-n', dest='grid_n', type=int)
    common.add_argument('--field')
    common.add_argument('--field-param', dest='field_params',
                        type=field_param, action='append', metavar='K=V')
    common.add_argument('--x', nargs='+', type=float)
    common.add_argument('--y', nargs='+', type=float)
    common.add_argument('--radii', nargs='+', type=float)
    common.add_argument('--directions', type=int)
    common.add_argument('--t-list', dest='t_list', nargs='+', type=float)
    common.add_argument('--count', type=int)
    common.add_argument('--seed', type=int)
    common.add_argument('--threads', type=int)
    common.add_argument('--out-dir', dest='out_dir')
    common.add_argument('--M', dest='M', type=float,
                        help='Cameron-Martin radius of the nondegeneracy scan')
    common.add_argument('-v', '--verbose', action='count', default=0)

    parser = argparse.ArgumentParser(
        prog='fbmdensity',
        description='Control distance and small-time density checks for '
                    'SDEs driven by fractional Brownian motion.')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common])
        if name == 'density':
            sub.add_argument('--varadhan', action='store_true', default=None,
                             help='also write the Varadhan diagnostic')
    return parser


def overrides_from(args):
    overrides = {key: getattr(args, key) for key in FLAG_KEYS}
    if args.field_params:
        overrides['field_params'] = dict(args.field_params)
    if getattr(args, 'varadhan', None):
        overrides['varadhan'] = True
    return overrides


def configure_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)


def summarize(table):
    with pd.option_context('display.max_rows', 200, 'display.width', 120):
        print(table.to_string(index=False))


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = load_config(args.config, overrides_from(args), args.command)
        experiment = Experiment(config)
        table = experiment.run(args.command)
    except (FactorizationError, CapabilityError) as err:
        logger.error('%s', err)
        return EXIT_RUNTIME
    except ValueError as err:
        logger.error('%s', err)
        return EXIT_VALIDATION
    except Exception as err:
        logger.error('%s: %s', type(err).__name__, err)
        return EXIT_RUNTIME
    summarize(table)
    for path in experiment.written:
        logger.info('output %s', path)
    if args.command == 'verify' and not table['passed'].all():
        failed = table.loc[~table['passed'], 'check'].tolist()
        logger.error('verification failed: %s', ', '.join(failed))
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
