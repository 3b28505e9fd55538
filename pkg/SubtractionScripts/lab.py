# lab.py
# Command-line front end of the photon-subtraction lab. Evaluates the moments,
# work and information tables of subtracted thermal light, the reflectivity
# and mode-number sweeps, the Monte Carlo experiment and the EM reconstruction,
# and writes every result table with units and a provenance block.
# Usage: python -m SubtractionScripts.lab <command> [flags]
#       commands: stats | work | info | sweep-r | sweep-m | simulate |
#                 reconstruct | figures
#       e.g. python -m SubtractionScripts.lab work --n-th 2 --m 0 1 2 3 --out results
#            python -m SubtractionScripts.lab simulate --m 1 --shots 1000000 --seed 7
#            python -m SubtractionScripts.lab figures --config run.yaml --jobs 4
# Data inputs:
#       - Optional flat YAML run configuration (--config), keys as in parameters.py
#       - Click histogram CSV/JSON for reconstruct (--histogram)
# Outputs:
#       - <out>/<table>.csv or .json for every table the command produces
#       - <out>/run_log.txt: one line per run event

import argparse
import os
import sys

from SubtractionScripts.commands import COMMANDS, RunConfig
from SubtractionScripts.parameters import FORMATS, MODELS
from SubtractionScripts import read_files
from SubtractionScripts.subtraction_utils import AppendLogger, Logger
from SubtractionScripts.subtraction_utils import EXIT_NUMERICAL, EXIT_SUCCESS, EXIT_VALIDATION
from SubtractionScripts.subtraction_utils import NumericalError, ValidationError, config_hash


# Parser -------------------------------------------------
parser = argparse.ArgumentParser(
    prog='python -m SubtractionScripts.lab',
    description='Conditional photon subtraction from thermal light.')
parser.add_argument('command', choices=list(COMMANDS.keys()))
parser.add_argument('--config', help='flat YAML run configuration')
parser.add_argument('--n-th', dest='n_th', type=float, help='mean thermal occupation')
parser.add_argument('--m', nargs='+', type=int,
                    help='subtracted quanta: a list for stats/work/info, one value otherwise')
parser.add_argument('--reflectivity', nargs='+', type=float,
                    help='beam-splitter reflectivity; the grid for sweep-r')
parser.add_argument('--eta', type=float,
                    help='collection efficiency of the heralding arm (PNRD efficiency for reconstruct)')
parser.add_argument('--eta-pnrd', dest='eta_pnrd', type=float, help='PNRD efficiency')
parser.add_argument('--channels', dest='N_pnrd', type=int, help='PNRD channel count')
parser.add_argument('--modes', nargs='+', type=int,
                    help='number of thermal modes; the grid for sweep-m')
parser.add_argument('--shots', type=int)
parser.add_argument('--seed', type=int)
parser.add_argument('--model', choices=MODELS)
parser.add_argument('--format', dest='fmt', choices=FORMATS)
parser.add_argument('--out', dest='out_dir', help='output directory')
parser.add_argument('--jobs', type=int, help='parallel workers (-1: all cores)')
parser.add_argument('--n-max', dest='n_max', type=int, help='reconstruction support')
parser.add_argument('--histogram', help='click histogram file for reconstruct')
parser.add_argument('--tail-tolerance', dest='tail_tolerance', type=float)


def _single(values, flag):
    if values is None:
        return None
    if len(values) != 1:
        raise ValidationError('[ERROR] {} takes a single value for this command.'.format(flag))
    return values[0]


def overrides_from_args(args):
    """
    Maps parsed flags onto RunConfig fields; list flags feed the sweep grid
    of the command they drive.
    :param args: (dict) vars of the parsed arguments
    :return: (dict)
    """
    command = args['command']
    overrides = {key: args[key] for key in ['n_th', 'eta_pnrd', 'N_pnrd', 'shots', 'seed', 'model',
                                            'fmt', 'out_dir', 'jobs', 'n_max', 'histogram',
                                            'tail_tolerance']}

    if command in ['stats', 'work', 'info', 'figures']:
        overrides['m_list'] = args['m']
    elif command == 'sweep-r':
        overrides['sweep_r_m'] = _single(args['m'], '--m')
    elif command == 'sweep-m':
        overrides['sweep_m_m'] = _single(args['m'], '--m')
    else:
        overrides['m_subtract'] = _single(args['m'], '--m')

    if command == 'sweep-r':
        overrides['R_grid'] = args['reflectivity']
    else:
        overrides['R'] = _single(args['reflectivity'], '--reflectivity')

    if command == 'sweep-m':
        overrides['M_grid'] = args['modes']
    else:
        overrides['M_modes'] = _single(args['modes'], '--modes')

    if command == 'reconstruct' and args['eta'] is not None:
        overrides['eta_pnrd'] = args['eta']
    else:
        overrides['eta_collect'] = args['eta']
    return overrides


def run_command(args):
    """
    Builds the run configuration, executes the command and writes its tables.
    :param args: (dict) vars of the parsed arguments
    :return: (list of str) written paths
    """
    file_values = read_files.load_run_config(args['config']) if args['config'] else {}
    run = RunConfig.from_sources(file_values, overrides_from_args(args))

    if not os.path.exists(run.out_dir):
        os.makedirs(run.out_dir)
    log_path = os.path.join(run.out_dir, 'run_log.txt')
    log = Logger(log_path) if args['command'] == 'figures' else AppendLogger(log_path)
    log.write('command={} config_hash={} seed={}'.format(
        args['command'], config_hash(run.provenance_dict()), run.seed))

    print('[INFO] Running {}.'.format(args['command']))
    tables = COMMANDS[args['command']](run)
    paths = []
    for table in tables:
        paths.append(table.write(run.out_dir, run.fmt))
        log.write('wrote {}'.format(paths[-1]))
    return paths


def main(argv=None):
    """
    Entry point; returns the process exit code.
    :param argv: (list of str) arguments without the program name
    :return: (int) 0 success, 2 usage or validation error, 3 numerical failure
    """
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as exit:
        return exit.code
    try:
        run_command(args)
    except ValidationError as error:
        print(error, file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as error:
        print(error, file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as error:
        print('[ERROR] {}'.format(error), file=sys.stderr)
        return EXIT_VALIDATION
    print('[INFO] Complete.')
    return EXIT_SUCCESS


if __name__ == '__main__':
    sys.exit(main())
