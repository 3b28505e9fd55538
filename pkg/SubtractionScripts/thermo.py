# thermo.py
# Statistical and thermodynamic figures of merit of photon-number
# distributions: moments (mean, variance, Fano factor, g2(0), mean-to-deviation
# ratio), Shannon and relative entropies, the available work relative to a
# thermal environment, mutual information of binary channels and the
# cooling/heating benchmarks the subtracted states are compared against.
#
# Work is always normalized by k_B T (natural log); information is in bits.

from dataclasses import dataclass
import math
import numpy as np
from scipy import optimize
from scipy.special import entr, gammaln, xlogy

from SubtractionScripts.fock_distributions import DEFAULT_POLICY
from SubtractionScripts.fock_distributions import subtracted_multimode_thermal_pmf
from SubtractionScripts.subtraction_utils import DomainError, ValidationError
from SubtractionScripts.subtraction_utils import check_count, check_probability


ENTROPY_BASES = {'nats': 1.0, 'bits': math.log(2)}
SEARCH_MARGIN = 1e-12
SEARCH_TOLERANCE = 1e-12
SERIES_RELATIVE_TOLERANCE = 1e-16
THRESHOLD_SCAN_CAP = 200


@dataclass(frozen=True)
class Moments:
    """Undefined ratios (zero mean or zero variance) are None."""
    mean: float
    variance: float
    fano: float = None
    g2: float = None
    mdr: float = None


@dataclass(frozen=True)
class BinaryChannel:
    """p01: bit 1 read as 0; p10: bit 0 read as 1."""
    p01: float
    p10: float

    def __post_init__(self):
        check_probability(self.p01, 'p01')
        check_probability(self.p10, 'p10')

    @property
    def degenerate(self):
        return self.p01 + self.p10 >= 1.0


@dataclass(frozen=True)
class DriveParams:
    """Thermal oscillator with mean n_th driven by n_c = g * n_th coherent quanta."""
    n_th: float
    g: float

    def __post_init__(self):
        if self.n_th < 0 or self.g < 0:
            raise DomainError('[ERROR] Drive parameters must be >= 0.')

    @property
    def n_c(self):
        return self.g * self.n_th


def _moments_from(mean, variance, factorial_second):
    if mean <= 0:
        return Moments(mean=mean, variance=variance)
    return Moments(mean=mean, variance=variance, fano=variance / mean,
                   g2=factorial_second / mean ** 2,
                   mdr=mean / math.sqrt(variance) if variance > 0 else None)


# Statistics ---------------------------------------------
def moments(p):
    """
    Moments of a photon-number distribution. g2 = <n(n-1)> / <n>^2.
    :param p: (PhotonDistribution)
    :return: (Moments)
    """
    n = p.photon_numbers.astype(float)
    mean = p.expectation(n)
    variance = max(p.expectation((n - mean) ** 2), 0.0)
    return _moments_from(mean, variance, p.expectation(n * (n - 1)))


def shannon_entropy(p, base='nats'):
    """
    Shannon entropy -sum p_n log p_n with 0 log 0 = 0.
    :param p: (PhotonDistribution)
    :param base: (str) one of ENTROPY_BASES
    :return: (float)
    """
    if base not in ENTROPY_BASES:
        raise ValidationError('[ERROR] Entropy base must be one of {}.'.format(
            list(ENTROPY_BASES.keys())))
    return math.fsum(entr(p.probs)) / ENTROPY_BASES[base]


def relative_entropy(p, q):
    """
    Kullback-Leibler divergence D(p||q) in nats. Returns math.inf if p puts
    mass where q has none (including beyond q's truncation point).
    :param p: (PhotonDistribution)
    :param q: (PhotonDistribution)
    :return: (float)
    """
    n_max = max(p.n_max, q.n_max)
    p_probs, q_probs = p.padded(n_max), q.padded(n_max)
    support = p_probs > 0
    if np.any(q_probs[support] == 0):
        print('[WARNING] Relative entropy is infinite: p is not absolutely '
              'continuous with respect to q.')
        return math.inf
    terms = xlogy(p_probs[support], p_probs[support]) - xlogy(p_probs[support], q_probs[support])
    return max(math.fsum(terms), 0.0)


def _thermal_log_pmf(n, n_th, M=1):
    mode_mean = n_th / M
    return gammaln(n + M) - gammaln(n + 1) - gammaln(M) + \
        n * math.log(mode_mean / (1.0 + mode_mean)) - M * math.log1p(mode_mean)


def available_work(p, n_th_env, M=1):
    """
    Work (in units of k_B T) available while p relaxes to a thermal
    environment with mean occupation n_th_env, spread over M equally
    populated modes when the total-count law of M modes is compared.
    :param p: (PhotonDistribution)
    :param n_th_env: (float) > 0
    :param M: (int) number of environment modes
    :return: (float)
    """
    if not n_th_env > 0:
        raise DomainError('[ERROR] Environment occupation must be > 0, got {}.'.format(n_th_env))
    log_q = _thermal_log_pmf(p.photon_numbers, n_th_env, check_count(M, 'M', minimum=1))
    return max(math.fsum(xlogy(p.probs, p.probs)) - p.expectation(log_q), 0.0)


def subtracted_work_series(n_th, m, policy=DEFAULT_POLICY):
    """
    Series for the work of the ideal m-photon-subtracted thermal state
    relative to its own initial thermal environment, summed term by term.
    :param n_th: (float) > 0
    :param m: (int)
    :param policy: (TruncationPolicy) hard_cap bounds the number of terms
    :return: (float)
    """
    if not n_th > 0:
        raise DomainError('[ERROR] n_th must be > 0, got {}.'.format(n_th))
    m = check_count(m, 'm')
    if m == 0:
        return 0.0

    log_ratio = math.log(n_th / (1.0 + n_th))
    log_prefactor = -(m + 1) * math.log1p(n_th)
    mode = (m + 1) * n_th
    terms = []
    for n in range(policy.hard_cap + 1):
        log_binomial = math.lgamma(n + m + 1) - math.lgamma(n + 1) - math.lgamma(m + 1)
        term = math.exp(log_prefactor + n * log_ratio + log_binomial) * \
            (log_binomial - m * math.log1p(n_th))
        terms.append(term)
        if n > mode and abs(term) < SERIES_RELATIVE_TOLERANCE * abs(math.fsum(terms)):
            break
    return math.fsum(terms)


def thermal_relative_entropy(n1, n2):
    """
    D(thermal(n1) || thermal(n2)) in closed form.
    :param n1: (float) > 0
    :param n2: (float) > 0
    :return: (float)
    """
    if not (n1 > 0 and n2 > 0):
        raise DomainError('[ERROR] Thermal occupations must be > 0, got {}, {}.'.format(n1, n2))
    return n1 * math.log(n1 / n2) + (1.0 + n1) * math.log((1.0 + n2) / (1.0 + n1))


def work_cooling_benchmark(n_th):
    """
    Work available after cooling one mode of the environment to its ground
    state: ln(1 + n_th).
    :param n_th: (float) >= 0
    :return: (float)
    """
    if n_th < 0:
        raise DomainError('[ERROR] n_th must be >= 0, got {}.'.format(n_th))
    return math.log1p(n_th)


def heated_work_benchmark(n_th, m):
    """Work of a thermal state heated to the mean (m+1) n_th of the subtracted state."""
    return thermal_relative_entropy((m + 1) * n_th, n_th)


# Information --------------------------------------------
def error_probability(n_th, m):
    """
    Probability that the subtracted state encoding bit 1 is read as vacuum.
    :param n_th: (float)
    :param m: (int)
    :return: (float)
    """
    if n_th < 0:
        raise DomainError('[ERROR] n_th must be >= 0, got {}.'.format(n_th))
    return (1.0 + n_th) ** (-(check_count(m, 'm') + 1))


def binary_entropy(x):
    """H(x) in bits, with H(0) = H(1) = 0."""
    return float((entr(x) + entr(1.0 - x)) / math.log(2))


def mutual_information_binary(p0A, channel):
    """
    Mutual information (bits) between the sent and received bit when 0 is
    sent with probability p0A through a binary channel.
    :param p0A: (float) probability of sending 0
    :param channel: (BinaryChannel)
    :return: (float)
    """
    p0A = check_probability(p0A, 'p0A')
    if channel.degenerate:
        return 0.0
    p1B = p0A * channel.p10 + (1.0 - p0A) * (1.0 - channel.p01)
    conditional = p0A * binary_entropy(channel.p10) + (1.0 - p0A) * binary_entropy(channel.p01)
    return max(binary_entropy(p1B) - conditional, 0.0)


def numeric_max_mutual_information(channel):
    """
    Maximizes the mutual information over the input probability with a bounded
    scalar search (the objective is concave in p0A).
    :param channel: (BinaryChannel)
    :return: (tuple) optimal p0A and the maximal information in bits
    """
    if channel.degenerate:
        return 0.5, 0.0
    result = optimize.minimize_scalar(
        lambda x: -mutual_information_binary(x, channel),
        bounds=(SEARCH_MARGIN, 1.0 - SEARCH_MARGIN), method='bounded',
        options={'xatol': SEARCH_TOLERANCE})
    return float(result.x), float(-result.fun)


def max_mutual_information_z(pE):
    """
    Capacity of the Z-channel where 1 is read as 0 with probability pE.
    :param pE: (float)
    :return: (float) bits
    """
    pE = check_probability(pE, 'pE')
    if pE == 1.0:
        return 0.0
    return math.log2(1.0 + (1.0 - pE) * pE ** (pE / (1.0 - pE)))


def max_mutual_information_general(channel):
    """
    Closed-form capacity of a binary asymmetric channel.
    :param channel: (BinaryChannel)
    :return: (float) bits
    """
    if channel.degenerate:
        return 0.0
    p01, p10 = channel.p01, channel.p10
    gap = 1.0 - p01 - p10
    h01, h10 = binary_entropy(p01), binary_entropy(p10)
    capacity = np.logaddexp2(0.0, (h01 - h10) / gap) - (1.0 - p10) / gap * h01 + p01 / gap * h10
    return max(float(capacity), 0.0)


def thermal_info_benchmark(n_th1):
    """
    Maximal information when bit 0 is the vacuum and bit 1 a thermal state
    with mean n_th1.
    :param n_th1: (float) > 0
    :return: (float) bits
    """
    if not n_th1 > 0:
        raise DomainError('[ERROR] n_th1 must be > 0, got {}.'.format(n_th1))
    return math.log2(1.0 + n_th1 * (1.0 + n_th1) ** (-(1.0 + n_th1) / n_th1))


def heated_info_benchmark(n_th, m):
    """Information of a thermal bit-1 state heated to the mean (m+1) n_th."""
    return thermal_info_benchmark((m + 1) * n_th)


def threshold_channel(n_th0, n_th1, n_max):
    """
    Binary channel induced by reading n <= n_max as bit 0 when bits are
    encoded in thermal states with means n_th0 < n_th1.
    :param n_th0: (float)
    :param n_th1: (float)
    :param n_max: (int)
    :return: (BinaryChannel)
    """
    p01 = 1.0 - (n_th1 / (1.0 + n_th1)) ** (1 + n_max)
    p10 = (n_th0 / (1.0 + n_th0)) ** (1 + n_max)
    return BinaryChannel(p01=p01, p10=p10)


def optimal_threshold(n_th0, n_th1, n_cap=THRESHOLD_SCAN_CAP):
    """
    Scans the decision threshold n_max = 0..n_cap for two thermal bit states
    and keeps the one with the largest capacity (ties: smallest n_max).
    :param n_th0: (float) >= 0
    :param n_th1: (float) > n_th0
    :param n_cap: (int)
    :return: (tuple) n_max and the induced BinaryChannel
    """
    if n_th0 < 0 or not n_th1 > n_th0:
        raise DomainError('[ERROR] Need 0 <= n_th0 < n_th1, got {}, {}.'.format(n_th0, n_th1))
    best_n, best_channel, best_value = 0, threshold_channel(n_th0, n_th1, 0), -math.inf
    for n_max in range(check_count(n_cap, 'n_cap') + 1):
        channel = threshold_channel(n_th0, n_th1, n_max)
        value = max_mutual_information_general(channel)
        if value > best_value:
            best_n, best_channel, best_value = n_max, channel, value
    return best_n, best_channel


# Coherent drive -----------------------------------------
def coherent_drive_moments(params):
    """
    Moments of a thermal oscillator coherently driven out of equilibrium,
    mean n_th + n_c and variance 2 n_c n_th + n_c + n_th^2 + n_th.
    :param params: (DriveParams)
    :return: (Moments)
    """
    n_th, n_c = params.n_th, params.n_c
    mean = n_th + n_c
    variance = 2 * n_c * n_th + n_c + n_th ** 2 + n_th
    return _moments_from(mean, variance, variance + mean ** 2 - mean)


# Multimode states ----------------------------------------
def first_order_coherence(M):
    return 1.0 / check_count(M, 'M', minimum=1)


def multimode_work(n_th_total, M, m, policy=DEFAULT_POLICY):
    """
    Work of an M-mode thermal state after incoherent subtraction of m quanta,
    relative to the unsubtracted M-mode state (total-count law).
    :param n_th_total: (float) overall mean number of quanta
    :param M: (int)
    :param m: (int)
    :param policy: (TruncationPolicy)
    :return: (tuple) raw work and work per mode
    """
    state = subtracted_multimode_thermal_pmf(n_th_total, M, m, policy)
    work = available_work(state, n_th_total, M)
    return work, work / M


def multimode_information(n_th_total, M, m, policy=DEFAULT_POLICY):
    """
    Z-channel capacity of vacuum (bit 0) against the m-subtracted M-mode
    thermal state (bit 1).
    :return: (tuple) raw capacity and capacity per mode
    """
    state = subtracted_multimode_thermal_pmf(n_th_total, M, m, policy)
    capacity = max_mutual_information_z(float(state.probs[0]))
    return capacity, capacity / M
