import itertools
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from SubtractionScripts.channels import ExperimentConfig, all_click_probability
from SubtractionScripts.channels import beamsplitter_joint, click_count_pmf, click_matrix
from SubtractionScripts.channels import herald, herald_acceptance, loss_channel
from SubtractionScripts.channels import multimode_subtract
from SubtractionScripts.fock_distributions import PhotonDistribution, multimode_thermal_pmf
from SubtractionScripts.fock_distributions import point_mass, subtracted_thermal_pmf
from SubtractionScripts.fock_distributions import thermal_pmf, total_variation
from SubtractionScripts.subtraction_utils import DomainError, ValidationError
from SubtractionScripts.thermo import relative_entropy


def _brute_force_clicks(s, N):
    counts = np.zeros(N + 1)
    for assignment in itertools.product(range(N), repeat=s):
        counts[len(set(assignment))] += 1
    return counts / N ** s


# Loss and splitting -------------------------------------
def test_lossless_channel_is_identity():
    p = thermal_pmf(2)
    assert loss_channel(p, 1.0) is p


def test_loss_on_single_photon():
    assert loss_channel(point_mass(1), 0.95).probs == pytest.approx([0.05, 0.95], abs=1e-15)


def test_thermal_light_stays_thermal_under_loss(tight_policy):
    lossy = loss_channel(thermal_pmf(2, tight_policy), 0.5)
    expected = thermal_pmf(1, tight_policy, n_max=lossy.n_max)
    np.testing.assert_allclose(lossy.probs, expected.probs, atol=1e-12)


def test_loss_scales_mean():
    p = thermal_pmf(3)
    assert loss_channel(p, 0.3).mean == pytest.approx(0.3 * p.mean, rel=1e-12)


def test_loss_domain():
    with pytest.raises(DomainError):
        loss_channel(thermal_pmf(1), 1.5)


@settings(max_examples=50, deadline=None)
@given(weights=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30).filter(lambda w: sum(w) > 0.01),
       a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0))
def test_loss_semigroup(weights, a, b):
    p = PhotonDistribution.from_probs(weights)
    twice = loss_channel(loss_channel(p, a), b)
    once = loss_channel(p, a * b)
    np.testing.assert_allclose(twice.probs, once.probs, atol=1e-12)


def test_beamsplitter_without_reflection():
    p = thermal_pmf(2)
    joint = beamsplitter_joint(p, 0.0).joint
    np.testing.assert_allclose(joint[:, 0], p.probs, atol=1e-15)
    assert joint[:, 1:].sum() == 0.0


def test_beamsplitter_binomial_split():
    joint = beamsplitter_joint(point_mass(2), 0.5).joint
    assert joint[2, 0] == pytest.approx(0.25)
    assert joint[1, 1] == pytest.approx(0.5)
    assert joint[0, 2] == pytest.approx(0.25)


def test_beamsplitter_marginals():
    p = thermal_pmf(2)
    split = beamsplitter_joint(p, 0.05)
    assert split.reflected().mean == pytest.approx(0.1, abs=1e-9)
    np.testing.assert_allclose(split.transmitted().probs, loss_channel(p, 0.95).probs, atol=1e-12)


# Click detection ----------------------------------------
def test_no_photons_no_clicks():
    assert click_count_pmf(0, 8) == pytest.approx(np.eye(1, 9, 0).ravel())


def test_two_photons_on_two_channels():
    assert click_count_pmf(2, 2)[2] == pytest.approx(0.5)
    assert all_click_probability(2, 2) == pytest.approx(0.5)


def test_pigeonhole():
    matrix = click_matrix(8, 20)
    for s in range(8):
        assert np.all(matrix[s, s + 1:] == 0.0)
    assert all_click_probability(1, 3) == 0.0


@pytest.mark.parametrize('k', [1, 2, 7, 50])
def test_single_herald_detector_fires_on_any_photon(k):
    assert all_click_probability(k, 1) == pytest.approx(1.0)


@pytest.mark.parametrize('N', [1, 2, 4, 8])
def test_povm_completeness(N):
    matrix = click_matrix(N, 200)
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(matrix >= 0)


@pytest.mark.parametrize('N', [1, 2, 3, 4])
@pytest.mark.parametrize('s', range(9))
def test_clicks_match_enumeration(s, N):
    np.testing.assert_allclose(click_count_pmf(s, N), _brute_force_clicks(s, N), atol=1e-12)


def test_dark_clicks_raise_acceptance():
    clean = herald_acceptance(2, 10)
    dark = herald_acceptance(2, 10, dark_click_probability=0.1)
    assert dark[0] == pytest.approx(0.01)
    assert np.all(dark >= clean)


# Heralding ----------------------------------------------
def test_experiment_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig(R=1.5)
    with pytest.raises(ValidationError):
        ExperimentConfig(n_th=-1)
    with pytest.raises(ValidationError):
        ExperimentConfig(N_pnrd=0)
    with pytest.raises(ValidationError):
        ExperimentConfig(m_subtract=-1)


def test_herald_without_subtraction_is_lossy_input():
    config = ExperimentConfig(n_th=2, R=0.3, m_subtract=0)
    result = herald(config)
    assert result.success_probability == 1.0
    np.testing.assert_allclose(result.output.probs, loss_channel(thermal_pmf(2), 0.7).probs, atol=1e-12)


@pytest.mark.parametrize('m', [1, 2, 3])
def test_full_model_approaches_ideal_subtraction(m):
    truth = subtracted_thermal_pmf(2, m)
    distances = [total_variation(herald(ExperimentConfig(n_th=2, R=R, eta_collect=1.0,
                                                         m_subtract=m)).output, truth)
                 for R in [1e-2, 1e-3, 1e-4]]
    assert distances[-1] < 1e-3
    assert distances[0] > distances[1] > distances[2]


def test_conditioning_is_monotone_in_m():
    rates = [herald(ExperimentConfig(n_th=2, R=0.05, eta_collect=0.5, m_subtract=m)).success_probability
             for m in range(5)]
    assert all(later <= earlier for earlier, later in zip(rates, rates[1:]))


def test_single_detector_herald_rate(experiment):
    # One detector fires unless every quantum is transmitted
    thermal = thermal_pmf(2)
    no_reflection = thermal.expectation(0.95 ** thermal.photon_numbers)
    assert herald(experiment).success_probability == pytest.approx(1 - no_reflection, rel=1e-9)


# Multimode ----------------------------------------------
def test_multimode_single_mode_subtraction(tight_policy):
    thermal = thermal_pmf(2, tight_policy)
    np.testing.assert_allclose(multimode_subtract(thermal, 2).probs,
                               subtracted_thermal_pmf(2, 2, tight_policy).probs[:thermal.n_max - 1],
                               atol=1e-12)


def test_multimode_subtraction_vanishes_for_many_modes():
    thermal = multimode_thermal_pmf(2, 64)
    assert relative_entropy(multimode_subtract(thermal, 1), thermal) < 0.01


def test_two_mode_subtraction_against_enumeration(tight_policy):
    # Incoherent subtraction: mixture of a single-quantum removal from each mode
    single = thermal_pmf(1, tight_policy).probs
    joint = np.outer(single, single)
    a, b = np.indices(joint.shape)
    total = np.zeros(2 * len(single))
    np.add.at(total, (a - 1)[a > 0] + b[a > 0], (a * joint)[a > 0])
    np.add.at(total, a[b > 0] + (b - 1)[b > 0], (b * joint)[b > 0])
    brute_mean = (np.arange(len(total)) * total).sum() / total.sum()
    subtracted = multimode_subtract(multimode_thermal_pmf(2, 2, tight_policy), 1)
    assert subtracted.mean == pytest.approx(brute_mean, abs=1e-9)
    assert subtracted.mean == pytest.approx(3.0, abs=1e-9)
