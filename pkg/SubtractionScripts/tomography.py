# tomography.py
# Forward model of the multiplexed click detector and maximum-likelihood
# reconstruction of photon-number statistics from click histograms.
#
# The detector matrix A[j, n] = P(j clicks | n photons) composes binomial
# detection loss with the click statistics of N balanced on-off channels.
# Reconstruction is plain expectation-maximization from a uniform start:
#   p_n <- p_n * sum_j A[j, n] f_j / (A p)_j
# which never decreases the log-likelihood sum_j f_j log (A p)_j because
# every column of A sums to 1.

from dataclasses import dataclass
import math
import numpy as np

from SubtractionScripts.channels import binomial_thinning_matrix, click_matrix
from SubtractionScripts.fock_distributions import PhotonDistribution
from SubtractionScripts.subtraction_utils import DomainError, ValidationError
from SubtractionScripts.subtraction_utils import check_count


PROBABILITY_FLOOR = 1e-300
SATURATION_TOLERANCE = 1e-12
RECONSTRUCTION_CAP = 128


@dataclass(frozen=True, eq=False)
class ForwardModel:
    """matrix[j, n]: probability of j clicks given n photons before detection loss."""
    matrix: np.ndarray
    N: int
    eta: float

    @property
    def n_max(self):
        return self.matrix.shape[1] - 1


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    estimate: PhotonDistribution
    iterations: int
    final_log_likelihood: float
    converged: bool
    log_likelihood_trace: np.ndarray
    floored_bins: int = 0


def forward_matrix(N, eta, n_max):
    """
    Detector response A[j, n] = sum_k Binom(k; n, eta) P(j | k).
    :param N: (int) number of on-off channels
    :param eta: (float) detection efficiency in (0, 1]
    :param n_max: (int) largest photon number of the model
    :return: (ForwardModel)
    """
    N = check_count(N, 'N', minimum=1)
    n_max = check_count(n_max, 'n_max')
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise DomainError('[ERROR] Detector efficiency must lie in (0, 1], got {}.'.format(eta))
    matrix = click_matrix(N, n_max).T @ binomial_thinning_matrix(eta, n_max)
    matrix.setflags(write=False)
    return ForwardModel(matrix=matrix, N=N, eta=eta)


def default_reconstruction_n_max(N, eta, cap=RECONSTRUCTION_CAP, tolerance=SATURATION_TOLERANCE):
    """
    Smallest n at which the all-click probability is within `tolerance` of 1,
    i.e. where the detector saturates; capped at `cap`.
    :param N: (int)
    :param eta: (float)
    :param cap: (int)
    :param tolerance: (float)
    :return: (int)
    """
    saturation = forward_matrix(N, eta, cap).matrix[N]
    saturated = np.nonzero(saturation >= 1.0 - tolerance)[0]
    if len(saturated) == 0:
        return cap
    return int(saturated[0])


def predicted_click_probabilities(model, p):
    """
    Click distribution A p for a photon-number law p.
    :param model: (ForwardModel)
    :param p: (PhotonDistribution) with n_max <= model.n_max
    :return: (np.ndarray) of length N + 1
    """
    return model.matrix @ p.padded(model.n_max)


def log_likelihood(model, p, frequencies):
    """
    Normalized log-likelihood sum_j f_j log (A p)_j.
    :param model: (ForwardModel)
    :param p: (PhotonDistribution)
    :param frequencies: (np.ndarray) observed click frequencies
    :return: (float)
    """
    predicted = np.maximum(predicted_click_probabilities(model, p), PROBABILITY_FLOOR)
    observed = frequencies > 0
    return math.fsum(frequencies[observed] * np.log(predicted[observed]))


def em_reconstruct(hist, model, max_iters=100000, tol=1e-10):
    """
    Expectation-maximization estimate of the photon-number distribution
    behind a click histogram.
    :param hist: (ClickHistogram) with hist.N == model.N
    :param model: (ForwardModel)
    :param max_iters: (int)
    :param tol: (float) stop once an update moves p by less than tol in total variation
    :return: (ReconstructionResult)
    """
    if hist.N != model.N:
        raise ValidationError('[ERROR] Histogram has {} channels, the model {}.'.format(hist.N, model.N))
    max_iters = check_count(max_iters, 'max_iters', minimum=1)
    frequencies = hist.frequencies
    observed = frequencies > 0
    A = model.matrix

    p = np.full(model.n_max + 1, 1.0 / (model.n_max + 1))
    trace = []
    floored = np.zeros(model.N + 1, dtype=bool)
    converged = False
    iterations = 0
    while iterations < max_iters:
        predicted = A @ p
        low = predicted < PROBABILITY_FLOOR
        floored |= low & observed
        predicted = np.where(low, PROBABILITY_FLOOR, predicted)
        trace.append(math.fsum(frequencies[observed] * np.log(predicted[observed])))

        updated = p * (A.T @ (frequencies / predicted))
        updated /= math.fsum(updated)
        iterations += 1
        change = 0.5 * math.fsum(np.abs(updated - p))
        p = updated
        if change < tol:
            converged = True
            break

    if floored.any():
        print('[WARNING] {} observed click bins had vanishing predicted probability.'.format(
            int(floored.sum())))
    estimate = PhotonDistribution.from_probs(p)
    final = log_likelihood(model, estimate, frequencies)
    trace.append(final)
    return ReconstructionResult(estimate=estimate, iterations=iterations, final_log_likelihood=final,
                                converged=converged, log_likelihood_trace=np.array(trace),
                                floored_bins=int(floored.sum()))
