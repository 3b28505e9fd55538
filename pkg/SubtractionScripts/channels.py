# channels.py
# Dissipation and detection channels acting on photon-number distributions:
# binomial loss, the beam-splitter split into transmitted and reflected quanta,
# the click statistics of a balanced N-channel on-off detector, and the
# heralded conditional state of the subtraction experiment (ideal and full
# finite-reflectivity model).
#
# Multimode subtraction is incoherent: a symmetric M-mode thermal state has a
# joint law that depends only on the total photon number, so every operation
# here acts on the total-count law.

from dataclasses import dataclass
import math
import numpy as np
from scipy import stats

from SubtractionScripts.fock_distributions import DEFAULT_POLICY, PhotonDistribution
from SubtractionScripts.fock_distributions import TruncationPolicy, ideal_subtract
from SubtractionScripts.fock_distributions import multimode_thermal_pmf
from SubtractionScripts.subtraction_utils import ConditioningError, ValidationError
from SubtractionScripts.subtraction_utils import check_count, check_probability


MIN_SUCCESS_PROBABILITY = 1e-300


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Parameters of the subtraction set-up. R is the beam-splitter reflectivity
    (1 - R is the single-quantum survival probability), eta_collect the overall
    collection efficiency of the heralding arm, N_pnrd / eta_pnrd the channel
    count and efficiency of the verification detector.
    """
    n_th: float = 2.0
    M_modes: int = 1
    R: float = 0.05
    eta_collect: float = 0.5
    m_subtract: int = 1
    N_pnrd: int = 8
    eta_pnrd: float = 0.6
    policy: TruncationPolicy = DEFAULT_POLICY
    dark_click_probability: float = 0.0

    def __post_init__(self):
        n_th = float(self.n_th)
        if not math.isfinite(n_th) or n_th < 0:
            raise ValidationError('[ERROR] n_th must be finite and >= 0, got {}.'.format(self.n_th))
        check_count(self.M_modes, 'M_modes', minimum=1)
        check_probability(self.R, 'R')
        check_probability(self.eta_collect, 'eta_collect')
        check_count(self.m_subtract, 'm_subtract')
        check_count(self.N_pnrd, 'N_pnrd', minimum=1)
        check_probability(self.eta_pnrd, 'eta_pnrd')
        check_probability(self.dark_click_probability, 'dark_click_probability')

    def source_distribution(self):
        """
        Total photon-number law of the (multimode) thermal source.
        :return: (PhotonDistribution)
        """
        return multimode_thermal_pmf(self.n_th, self.M_modes, self.policy)


@dataclass(frozen=True, eq=False)
class JointSplitDistribution:
    """joint[t, r]: probability of t transmitted and r reflected quanta."""
    joint: np.ndarray

    def __post_init__(self):
        joint = np.array(self.joint, dtype=float)
        if joint.ndim != 2 or np.any(joint < 0):
            raise ValidationError('[ERROR] Joint split must be a non-negative matrix.')
        if abs(math.fsum(joint.ravel()) - 1.0) > 1e-9:
            raise ValidationError('[ERROR] Joint split probabilities do not sum to 1.')
        joint.setflags(write=False)
        object.__setattr__(self, 'joint', joint)

    def transmitted(self):
        return PhotonDistribution.from_probs(self.joint.sum(axis=1))

    def reflected(self):
        return PhotonDistribution.from_probs(self.joint.sum(axis=0))


@dataclass(frozen=True, eq=False)
class HeraldResult:
    output: PhotonDistribution
    success_probability: float


# Binomial dissipation ------------------------------------
def binomial_thinning_matrix(survival, n_max):
    """
    Matrix L[k, n] = C(n, k) survival^k (1 - survival)^(n - k) of independent
    single-quantum survival.
    :param survival: (float) survival probability of a single quantum
    :param n_max: (int) largest input photon number
    :return: (np.ndarray) of shape (n_max + 1, n_max + 1), columns sum to 1
    """
    survival = check_probability(survival, 'survival')
    n = np.arange(n_max + 1)
    if survival == 1.0:
        return np.eye(n_max + 1)
    if survival == 0.0:
        matrix = np.zeros((n_max + 1, n_max + 1))
        matrix[0, :] = 1.0
        return matrix
    return stats.binom.pmf(n[:, None], n[None, :], survival)


def loss_channel(p, survival):
    """
    Binomial loss: every quantum survives independently with probability
    `survival`.
    :param p: (PhotonDistribution)
    :param survival: (float) in [0, 1]
    :return: (PhotonDistribution)
    """
    survival = check_probability(survival, 'survival')
    if survival == 1.0:
        return p
    thinned = binomial_thinning_matrix(survival, p.n_max) @ p.probs
    return PhotonDistribution.from_probs(thinned, tail_mass=p.tail_mass)


def beamsplitter_joint(p, R):
    """
    Splits each quantum independently: reflected with probability R,
    transmitted otherwise.
    :param p: (PhotonDistribution) input law
    :param R: (float) reflectivity
    :return: (JointSplitDistribution)
    """
    R = check_probability(R, 'R')
    n_max = p.n_max
    reflection = binomial_thinning_matrix(R, n_max)  # [r, n]
    n_idx, r_idx = np.nonzero(np.tril(np.ones((n_max + 1, n_max + 1))))
    joint = np.zeros((n_max + 1, n_max + 1))
    joint[n_idx - r_idx, r_idx] = reflection[r_idx, n_idx] * p.probs[n_idx]
    return JointSplitDistribution(joint / math.fsum(joint.ravel()))


# Multichannel click detection ----------------------------
def click_matrix(N, s_max):
    """
    P[s, j]: probability that s quanta spread uniformly over N on-off channels
    make exactly j channels click. Built by adding quanta one at a time, which
    reproduces the alternating-sum closed form without its cancellation.
    :param N: (int) number of channels, >= 1
    :param s_max: (int) largest photon number
    :return: (np.ndarray) of shape (s_max + 1, N + 1), rows sum to 1
    """
    N = check_count(N, 'N', minimum=1)
    s_max = check_count(s_max, 's_max')
    j = np.arange(N + 1)
    hit_again = j / N
    hit_new = (N - j + 1) / N
    matrix = np.zeros((s_max + 1, N + 1))
    matrix[0, 0] = 1.0
    for s in range(s_max):
        matrix[s + 1] = matrix[s] * hit_again
        matrix[s + 1, 1:] += matrix[s, :-1] * hit_new[1:]
    return matrix


def click_count_pmf(s, N):
    """
    Click-number distribution P(j | s) for j = 0..N.
    :param s: (int) number of quanta reaching the detector
    :param N: (int) number of channels
    :return: (np.ndarray) of length N + 1
    """
    s = check_count(s, 's')
    return click_matrix(N, s)[s]


def all_click_probability(k, m):
    """
    Probability that k quanta fire all m heralding detectors.
    :param k: (int)
    :param m: (int) >= 1
    :return: (float)
    """
    m = check_count(m, 'm', minimum=1)
    return float(click_count_pmf(k, m)[m])


def herald_acceptance(m, s_max, dark_click_probability=0.0):
    """
    Probability that all m heralding channels fire given s = 0..s_max quanta
    reach them. A channel missed by every quantum still fires with the dark
    click probability.
    :param m: (int) number of heralding detectors
    :param s_max: (int)
    :param dark_click_probability: (float)
    :return: (np.ndarray) of length s_max + 1
    """
    if m == 0:
        return np.ones(s_max + 1)
    clicks = click_matrix(m, s_max)
    if dark_click_probability == 0:
        return clicks[:, m].copy()
    missed = m - np.arange(m + 1)
    return clicks @ (dark_click_probability ** missed)


# Heralded subtraction ------------------------------------
def herald(config):
    """
    Full model of the subtraction: the source splits at the beam splitter,
    reflected quanta pass the collection efficiency and spread over m on-off
    detectors, and the transmitted state is kept only if all m fire.
    :param config: (ExperimentConfig)
    :return: (HeraldResult)
    """
    source = config.source_distribution()
    split = beamsplitter_joint(source, config.R)
    if config.m_subtract == 0:
        return HeraldResult(output=split.transmitted(), success_probability=1.0)

    n_max = source.n_max
    acceptance = herald_acceptance(
        config.m_subtract, n_max, config.dark_click_probability)
    # Acceptance before collection loss: sum over surviving k' of Binom(k'; k, eta)
    acceptance = acceptance @ binomial_thinning_matrix(config.eta_collect, n_max)

    weights = split.joint @ acceptance
    success = math.fsum(weights)
    if not success >= MIN_SUCCESS_PROBABILITY:
        raise ConditioningError(
            '[ERROR] Heralding probability {:.3g} is numerically zero.'.format(success))
    output = PhotonDistribution.from_probs(weights, tail_mass=source.tail_mass)
    return HeraldResult(output=output, success_probability=min(success, 1.0))


def multimode_subtract(p_total, m):
    """
    Incoherent subtraction of m quanta from an exchangeable multimode thermal
    state, acting on its total-count law.
    :param p_total: (PhotonDistribution) total photon-number law
    :param m: (int)
    :return: (PhotonDistribution)
    """
    return ideal_subtract(p_total, m)
