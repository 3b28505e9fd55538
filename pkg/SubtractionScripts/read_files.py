# Functions to read in run-config files and click histograms written by the
# simulate command or by an external acquisition.

import json
import os
import pandas as pd
import yaml

from SubtractionScripts.monte_carlo import ClickHistogram
from SubtractionScripts.parameters import EXPERIMENT_DEFAULTS, RUN_DEFAULTS, SWEEP_DEFAULTS
from SubtractionScripts.subtraction_utils import ValidationError


CONFIG_KEYS = set(EXPERIMENT_DEFAULTS) | set(SWEEP_DEFAULTS) | set(RUN_DEFAULTS)


# Run configuration
def load_run_config(config_file):
    """
    Reads a flat YAML mapping of run parameters.
    :param config_file: (str) path to the .yaml file
    :return: (dict)
    """
    try:
        print('[INFO] Loading run configuration.')
        with open(config_file, 'r') as file:
            config = yaml.safe_load(file)
    except FileNotFoundError:
        raise ValidationError('[ERROR] Run configuration file not found.')
    except yaml.YAMLError as error:
        raise ValidationError('[ERROR] Run configuration is not valid YAML: {}'.format(error))

    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ValidationError('[ERROR] Run configuration must be a key-value mapping.')

    unknown = sorted(set(config) - CONFIG_KEYS)
    if unknown:
        raise ValidationError('[ERROR] Unknown run configuration keys: {}.'.format(unknown))
    for key, value in config.items():
        if isinstance(value, dict) or (isinstance(value, list) and key not in SWEEP_DEFAULTS):
            raise ValidationError('[ERROR] Run configuration key "{}" must be a scalar.'.format(key))

    return config


# Click histograms
def _histogram_from_frame(frame, N):
    columns = {column.split('[')[0]: column for column in frame.columns}
    if 'j' not in columns or 'count' not in columns:
        raise ValidationError('[ERROR] Click histogram needs "j" and "count" columns.')
    bins = frame[columns['j']].astype(int).to_numpy()
    counts = frame[columns['count']].astype(int).to_numpy()
    if (bins < 0).any() or (bins > N).any():
        raise ValidationError('[ERROR] Click histogram has bins outside 0..{}.'.format(N))
    if (counts < 0).any():
        raise ValidationError('[ERROR] Click histogram has negative counts.')
    full = pd.Series(counts).groupby(bins).sum().reindex(range(N + 1), fill_value=0)
    return full.to_numpy()


def load_click_histogram(histogram_file, N):
    """
    Reads a click histogram from a CSV file (columns j, count; "# key: value"
    comment lines are skipped) or from the JSON layout of result_tables.
    :param histogram_file: (str)
    :param N: (int) number of detector channels; bins beyond N are rejected
    :return: (ClickHistogram)
    """
    print('[INFO] Loading click histogram.')
    try:
        if os.path.splitext(histogram_file)[1].lower() == '.json':
            with open(histogram_file, 'r') as file:
                document = json.load(file)
            frame = pd.DataFrame(document['rows'], columns=document['columns'])
            summary = document.get('summary', {})
        else:
            with open(histogram_file, 'r') as file:
                frame = pd.read_csv(file, comment='#')
            summary = {}
    except FileNotFoundError:
        raise ValidationError('[ERROR] Click histogram file not found.')
    except (KeyError, ValueError, json.JSONDecodeError) as error:
        raise ValidationError('[ERROR] Click histogram file is malformed: {}'.format(error))

    counts = _histogram_from_frame(frame, N)
    heralded = int(counts.sum())
    if heralded == 0:
        raise ValidationError('[ERROR] Click histogram is empty.')
    total = max(int(summary.get('total_shots', heralded)), heralded)
    return ClickHistogram(counts=counts, total_shots=total, heralded_shots=heralded)
