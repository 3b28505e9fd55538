import hashlib
import json
import os


# Errors -------------------------------------------------
class ValidationError(ValueError):
    """Invalid user input: bad grids, unknown config keys, malformed files."""


class DomainError(ValidationError):
    """A parameter lies outside its mathematical domain."""


class NumericalError(ArithmeticError):
    """A computation could not produce a meaningful number."""


class ConditioningError(NumericalError):
    """Conditioning on an event of (numerically) zero probability."""


class ConvergenceError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass


# Exit codes of SubtractionScripts.lab
EXIT_SUCCESS = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def check_probability(value, name):
    """
    Raises a DomainError if value is not a probability.
    :param value: (float)
    :param name: (str) parameter name used in the error message
    :return: (float) the value as a float
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError('[ERROR] {} must be a number, got {!r}.'.format(name, value))
    if not 0.0 <= value <= 1.0:
        raise DomainError('[ERROR] {} must lie in [0, 1], got {}.'.format(name, value))
    return value


def check_count(value, name, minimum=0):
    """
    Raises a DomainError if value is not an integer >= minimum.
    :param value: (int)
    :param name: (str)
    :param minimum: (int)
    :return: (int)
    """
    try:
        integral = not isinstance(value, bool) and int(value) == value
    except (TypeError, ValueError, OverflowError):
        integral = False
    if not integral:
        raise DomainError('[ERROR] {} must be an integer, got {}.'.format(name, value))
    value = int(value)
    if value < minimum:
        raise DomainError('[ERROR] {} must be >= {}, got {}.'.format(name, minimum, value))
    return value


# Provenance ---------------------------------------------
def config_hash(config_dict):
    """
    Reproducible short hash of a configuration dictionary.
    :param config_dict: (dict) JSON-serializable configuration
    :return: (str) first 16 hex characters of the SHA-256 digest
    """
    payload = json.dumps(config_dict, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]


# Logger -------------------------------------------------
class Logger:
    def __init__(self, path):
        """
        Instantiates the logger as a .txt file at the specified path
        :param path: (str) path to run outputs
        """
        self.path = path

        if not os.path.exists(os.path.dirname(os.path.abspath(self.path))):
            os.makedirs(os.path.dirname(os.path.abspath(self.path)))
        with open(self.path, 'w') as file:
            file.write('')

    def write(self, text):
        """
        Writes text to logger.
        :param text: (str)
        :return: void
        """
        with open(self.path, 'a+') as file:
            file.write(text + '\n')


class AppendLogger:
    def __init__(self, path):
        """
        Instantiates the logger as a .txt file at the specified path, keeping
        any previous content.
        :param path: (str) path to run outputs
        """
        self.path = path

    def write(self, text):
        """
        Writes text to logger.
        :param text: (str)
        :return: void
        """
        with open(self.path, 'a+') as file:
            file.write(text + '\n')
