# result_tables.py
# Result tables of the lab: pandas frames with "name[unit]" headers plus a
# provenance block (config hash, seed, version, command) and table-level
# summary flags, written as CSV (provenance as leading "# key: value" lines)
# or JSON (top-level provenance, summary, columns, rows).

from dataclasses import dataclass, field
import json
import math
import os
import numpy as np
import pandas as pd

from SubtractionScripts.parameters import COLUMN_UNITS, FORMATS, VERSION
from SubtractionScripts.subtraction_utils import ValidationError, config_hash


def column_label(name):
    """
    Header of a result column, e.g. 'work' -> 'work[kBT]'.
    :param name: (str) a key of COLUMN_UNITS
    :return: (str)
    """
    if name not in COLUMN_UNITS:
        raise ValidationError('[ERROR] Column "{}" has no unit.'.format(name))
    return '{}[{}]'.format(name, COLUMN_UNITS[name])


def _plain(value):
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return None if math.isnan(value) else float(value)
    return value


@dataclass
class ResultTable:
    name: str
    frame: pd.DataFrame
    provenance: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @classmethod
    def from_rows(cls, name, rows, columns, config, command, summary=None):
        """
        Builds a table from row dictionaries keyed by plain column names.
        :param name: (str) file stem of the table
        :param rows: (list of dict)
        :param columns: (list of str) column order
        :param config: (dict) effective run configuration
        :param command: (str) command that produced the table
        :param summary: (dict) table-level flags
        :return: (ResultTable)
        """
        frame = pd.DataFrame([[row[column] for column in columns] for row in rows],
                             columns=[column_label(column) for column in columns])
        provenance = {'command': command,
                      'config_hash': config_hash(config),
                      'seed': config.get('seed'),
                      'version': VERSION}
        return cls(name=name, frame=frame, provenance=provenance,
                   summary={key: _plain(value) for key, value in (summary or {}).items()})

    def column(self, name):
        return self.frame[column_label(name)]

    def to_csv(self, path):
        """
        Writes provenance and summary as '# key: value' lines, then the table.
        :param path: (str)
        :return: void
        """
        with open(path, 'w', encoding='utf-8', newline='\n') as file:
            for key, value in sorted(self.provenance.items()):
                file.write('# {}: {}\n'.format(key, value))
            for key, value in sorted(self.summary.items()):
                file.write('# summary.{}: {}\n'.format(key, value))
            self.frame.to_csv(file, index=False, lineterminator='\n', float_format='%.17g')

    def to_json(self, path):
        document = {'provenance': self.provenance,
                    'summary': self.summary,
                    'columns': list(self.frame.columns),
                    'rows': [[_plain(value) for value in row]
                             for row in self.frame.itertuples(index=False, name=None)]}
        with open(path, 'w', encoding='utf-8', newline='\n') as file:
            json.dump(document, file, indent=2, sort_keys=True)
            file.write('\n')

    def write(self, out_dir, fmt):
        """
        Writes the table as <out_dir>/<name>.<fmt>.
        :param out_dir: (str)
        :param fmt: (str) 'csv' or 'json'
        :return: (str) path of the written file
        """
        if fmt not in FORMATS:
            raise ValidationError('[ERROR] Output format must be one of {}.'.format(FORMATS))
        if not os.path.exists(out_dir):
            os.makedirs(out_dir)
        path = os.path.join(out_dir, '{}.{}'.format(self.name, fmt))
        if fmt == 'csv':
            self.to_csv(path)
        else:
            self.to_json(path)
        print('[INFO] Wrote {}.'.format(path))
        return path


def distribution_rows(p):
    return [{'n': n, 'probability': float(value)} for n, value in enumerate(p.probs)]


def histogram_rows(hist):
    return [{'j': j, 'count': int(count), 'frequency': float(count) / max(hist.heralded_shots, 1)}
            for j, count in enumerate(hist.counts)]
