# fock_distributions.py
# Photon-number distributions of diagonal single-mode and multimode states:
# thermal (Bose-Einstein), multimode thermal (negative binomial total count),
# ideally m-photon-subtracted thermal, and the ideal subtraction map applied
# to an arbitrary distribution.
#
# Every distribution is a truncated probability vector over n = 0..n_max. The
# truncation point is chosen adaptively from the analytic tail of the law and
# the probability mass cut away is recorded as tail_mass.

from dataclasses import dataclass
import math
import numpy as np
from scipy import stats
from scipy.special import gammaln

from SubtractionScripts.subtraction_utils import ConditioningError, DomainError
from SubtractionScripts.subtraction_utils import TruncationError, ValidationError
from SubtractionScripts.subtraction_utils import check_count


NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TruncationPolicy:
    tail_tolerance: float = 1e-12
    hard_cap: int = 4096

    def __post_init__(self):
        if not 0.0 < self.tail_tolerance < 1.0:
            raise DomainError('[ERROR] tail_tolerance must lie in (0, 1), got {}.'.format(
                self.tail_tolerance))
        check_count(self.hard_cap, 'hard_cap', minimum=1)


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """
    Truncated photon-number distribution. probs[n] is the probability of n
    quanta; tail_mass is the mass above n_max before renormalization.
    Instances are immutable (probs is a read-only array).
    """
    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or len(probs) == 0:
            raise ValidationError('[ERROR] Photon distribution must be a non-empty vector.')
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValidationError('[ERROR] Photon distribution entries must be finite and >= 0.')
        total = math.fsum(probs)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValidationError(
                '[ERROR] Photon distribution sums to {!r}, not 1.'.format(total))
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)
        object.__setattr__(self, 'tail_mass', float(self.tail_mass))

    @classmethod
    def from_probs(cls, weights, tail_mass=0.0):
        """
        Builds a distribution from non-negative weights by renormalizing them.
        :param weights: (array-like) unnormalized weights indexed by n
        :param tail_mass: (float) mass cut away above the last index
        :return: (PhotonDistribution)
        """
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or len(weights) == 0 or np.any(weights < 0):
            raise ValidationError('[ERROR] Weights must be a non-empty, non-negative vector.')
        total = math.fsum(weights)
        if not total > 0 or not math.isfinite(total):
            raise ValidationError('[ERROR] Weights have no positive finite mass.')
        return cls(weights / total, tail_mass=tail_mass)

    @classmethod
    def from_counts(cls, counts):
        """
        Normalized frequency histogram of observed photon numbers.
        :param counts: (array-like of int) counts[n] = occurrences of n
        :return: (PhotonDistribution)
        """
        counts = np.asarray(counts)
        if counts.sum() <= 0:
            raise ConditioningError('[ERROR] Cannot build a distribution from zero counts.')
        nonzero = np.nonzero(counts)[0]
        return cls.from_probs(counts[:nonzero[-1] + 1].astype(float))

    @property
    def n_max(self):
        return len(self.probs) - 1

    @property
    def photon_numbers(self):
        return np.arange(len(self.probs))

    def expectation(self, values):
        """
        Compensated expectation of a function tabulated on 0..n_max.
        :param values: (np.ndarray) f(n) for n = 0..n_max
        :return: (float)
        """
        return math.fsum(np.asarray(values, dtype=float) * self.probs)

    @property
    def mean(self):
        return self.expectation(self.photon_numbers)

    def padded(self, n_max):
        """
        Probability vector extended with zeros up to n_max.
        :param n_max: (int) must be >= self.n_max
        :return: (np.ndarray)
        """
        if n_max < self.n_max:
            raise ValidationError('[ERROR] Cannot pad a distribution to a shorter support.')
        padded = np.zeros(n_max + 1)
        padded[:len(self.probs)] = self.probs
        return padded


def total_variation(p, q):
    """
    Total-variation distance between two distributions on their common support.
    :param p: (PhotonDistribution)
    :param q: (PhotonDistribution)
    :return: (float)
    """
    n_max = max(p.n_max, q.n_max)
    return 0.5 * math.fsum(np.abs(p.padded(n_max) - q.padded(n_max)))


def point_mass(n):
    """
    Distribution with all probability on exactly n quanta.
    :param n: (int)
    :return: (PhotonDistribution)
    """
    n = check_count(n, 'n')
    probs = np.zeros(n + 1)
    probs[n] = 1.0
    return PhotonDistribution(probs)


# Truncated negative binomial laws -----------------------
def _check_mean(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError('[ERROR] {} must be finite, got {}.'.format(name, value))
    if value < 0:
        raise DomainError('[ERROR] {} must be >= 0, got {}.'.format(name, value))
    return value


def _truncated_negative_binomial(shape, mode_mean, policy, n_max=None):
    """
    Truncates the law p_n = C(n+shape-1, n) mu^n / (1+mu)^(n+shape), i.e. the
    total count of `shape` thermal modes with mean mu each.
    :param shape: (int) number of thermal modes
    :param mode_mean: (float) mean number of quanta per mode
    :param policy: (TruncationPolicy)
    :param n_max: (int) explicit truncation point; chosen adaptively if None
    :return: (PhotonDistribution)
    """
    if mode_mean == 0:
        return point_mass(0) if n_max is None else PhotonDistribution(
            np.eye(1, n_max + 1, 0).ravel())

    law = stats.nbinom(shape, 1.0 / (1.0 + mode_mean))
    if n_max is None:
        tails = law.sf(np.arange(policy.hard_cap + 1))
        below = np.nonzero(tails < policy.tail_tolerance)[0]
        if len(below) == 0:
            raise TruncationError(
                '[ERROR] Truncation reached hard_cap={} with tail mass {:.3g} above '
                'tolerance {:.3g}.'.format(policy.hard_cap, tails[-1], policy.tail_tolerance))
        n_max = int(below[0])
    else:
        n_max = check_count(n_max, 'n_max')

    # Log-scale evaluation keeps large-n entries from underflowing to garbage
    probs = np.exp(law.logpmf(np.arange(n_max + 1)))
    return PhotonDistribution.from_probs(probs, tail_mass=float(law.sf(n_max)))


def thermal_pmf(n_th, policy=DEFAULT_POLICY, n_max=None):
    """
    Bose-Einstein statistics p_n = n_th^n / (1+n_th)^(1+n).
    :param n_th: (float) mean number of thermal quanta, >= 0
    :param policy: (TruncationPolicy)
    :param n_max: (int) optional explicit truncation point
    :return: (PhotonDistribution)
    """
    n_th = _check_mean(n_th, 'n_th')
    return _truncated_negative_binomial(1, n_th, policy, n_max)


def multimode_thermal_pmf(n_th_total, M, policy=DEFAULT_POLICY, n_max=None):
    """
    Total photon-number law of M equally populated thermal modes with overall
    mean n_th_total (negative binomial with shape M).
    :param n_th_total: (float) overall mean number of quanta
    :param M: (int) number of modes, >= 1
    :param policy: (TruncationPolicy)
    :param n_max: (int) optional explicit truncation point
    :return: (PhotonDistribution)
    """
    n_th_total = _check_mean(n_th_total, 'n_th_total')
    M = check_count(M, 'M', minimum=1)
    return _truncated_negative_binomial(M, n_th_total / M, policy, n_max)


def subtracted_thermal_pmf(n_th, m, policy=DEFAULT_POLICY, n_max=None):
    """
    Statistics of single-mode thermal light after ideal subtraction of m
    quanta: p_n = C(n+m, m) (n_th/(1+n_th))^n / (1+n_th)^(m+1).
    :param n_th: (float) mean number of quanta of the initial thermal state
    :param m: (int) number of subtracted quanta
    :param policy: (TruncationPolicy)
    :param n_max: (int) optional explicit truncation point
    :return: (PhotonDistribution)
    """
    n_th = _check_mean(n_th, 'n_th')
    m = check_count(m, 'm')
    if n_th == 0 and m > 0:
        raise ConditioningError(
            '[ERROR] Cannot subtract {} quanta from the vacuum.'.format(m))
    return _truncated_negative_binomial(m + 1, n_th, policy, n_max)


def ideal_subtract(p, m):
    """
    Applies the m-th power of the annihilation operator to a diagonal state:
    p'_n is proportional to (n+m)!/n! p_{n+m}.
    :param p: (PhotonDistribution)
    :param m: (int) number of subtracted quanta
    :return: (PhotonDistribution)
    """
    m = check_count(m, 'm')
    if m == 0:
        return p
    if p.n_max < m:
        raise ConditioningError(
            '[ERROR] Distribution has no support at n >= {}; subtraction impossible.'.format(m))

    n = np.arange(p.n_max - m + 1)
    with np.errstate(divide='ignore'):
        log_weights = np.log(p.probs[m:]) + gammaln(n + m + 1) - gammaln(n + 1)
    if not np.any(np.isfinite(log_weights)):
        raise ConditioningError(
            '[ERROR] Distribution has no support at n >= {}; subtraction impossible.'.format(m))
    weights = np.exp(log_weights - np.max(log_weights))
    return PhotonDistribution.from_probs(weights, tail_mass=p.tail_mass)


def subtracted_multimode_thermal_pmf(n_th_total, M, m, policy=DEFAULT_POLICY, n_max=None):
    """
    Total photon-number law of M equally populated thermal modes after
    incoherent subtraction of m quanta: negative binomial with shape M + m and
    the unchanged per-mode mean n_th_total / M.
    :param n_th_total: (float) overall mean number of quanta before subtraction
    :param M: (int) number of modes
    :param m: (int) number of subtracted quanta
    :param policy: (TruncationPolicy)
    :param n_max: (int) optional explicit truncation point
    :return: (PhotonDistribution)
    """
    n_th_total = _check_mean(n_th_total, 'n_th_total')
    M = check_count(M, 'M', minimum=1)
    m = check_count(m, 'm')
    if n_th_total == 0 and m > 0:
        raise ConditioningError(
            '[ERROR] Cannot subtract {} quanta from the vacuum.'.format(m))
    return _truncated_negative_binomial(M + m, n_th_total / M, policy, n_max)
