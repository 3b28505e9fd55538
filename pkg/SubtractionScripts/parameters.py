# parameters.py
# Dictionaries of default experiment parameters, sweep grids and run options
# used by the command-line lab. Values mirror the experiment: thermal light
# with n_th = 2, a 5% reflectivity tap, up to three subtracted quanta and an
# eight-channel verification detector.
# Usage: Any key of EXPERIMENT_DEFAULTS, SWEEP_DEFAULTS and RUN_DEFAULTS may be
# overridden in a flat YAML run-config file or by the matching CLI flag.
#       - EXPERIMENT_DEFAULTS: fields of channels.ExperimentConfig
#       - SWEEP_DEFAULTS: axes of the parameter sweeps
#       - RUN_DEFAULTS: output format, seed, shot count, model and workers

import numpy as np


VERSION = '1.0.0'

EXPERIMENT_DEFAULTS = {
    'n_th': 2.0,
    'M_modes': 1,
    'R': 0.05,
    'eta_collect': 0.5,
    'm_subtract': 1,
    'N_pnrd': 8,
    'eta_pnrd': 0.6,
    'dark_click_probability': 0.0
}

SWEEP_DEFAULTS = {
    'm_list': [0, 1, 2, 3],
    'R_grid': sorted(set([float(r) for r in np.geomspace(0.001, 0.5, 60)] + [0.05])),
    'M_grid': [1, 2, 4, 8, 16, 32, 64],
    'sweep_r_m': 3,
    'sweep_m_m': 1
}

RUN_DEFAULTS = {
    'out_dir': 'results',
    'fmt': 'csv',
    'seed': 2017,
    'shots': 1000000,
    'model': 'ideal',
    'tail_tolerance': 1e-15,
    'jobs': 1,
    'n_max': None,
    'histogram': None,
    'max_iters': 100000,
    'tol': 1e-10
}

MODELS = ['ideal', 'full']
FORMATS = ['csv', 'json']

# Unit labels of result columns, written as "name[unit]" headers
COLUMN_UNITS = {
    'm': '1',
    'M': '1',
    'R': '1',
    'n': '1',
    'j': '1',
    'mean': 'quanta',
    'variance': 'quanta^2',
    'g2': '1',
    'fano': '1',
    'mdr': '1',
    'g1': '1',
    'entropy': 'nats',
    'entropy_unsubtracted': 'nats',
    'work': 'kBT',
    'work_per_mode': 'kBT',
    'cooling_benchmark': 'kBT',
    'heated_benchmark': 'kBT',
    'above_cooling': 'bool',
    'above_heated': 'bool',
    'pE': '1',
    'info': 'bits',
    'info_per_mode': 'bits',
    'info_per_mode_unsubtracted': 'bits',
    'heated_info_benchmark': 'bits',
    'thermal_info_threshold': 'bits',
    'above_heated_info': 'bool',
    'herald_rate': '1',
    'probability': '1',
    'count': 'shots',
    'frequency': '1',
    'selection': 'label'
}
