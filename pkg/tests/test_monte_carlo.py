import math
import numpy as np
import pytest

from SubtractionScripts.channels import ExperimentConfig, herald
from SubtractionScripts.fock_distributions import subtracted_thermal_pmf, thermal_pmf
from SubtractionScripts.fock_distributions import total_variation
from SubtractionScripts import monte_carlo
from SubtractionScripts.monte_carlo import BLOCK_SIZE, SeedSpec, ShotRecord
from SubtractionScripts.subtraction_utils import ConditioningError, ValidationError
from SubtractionScripts.thermo import moments
from SubtractionScripts.tomography import forward_matrix, predicted_click_probabilities


def _tally(config, shots, seed=SeedSpec(), n_jobs=1):
    return monte_carlo.tally(monte_carlo.simulate_blocks(config, shots, seed, n_jobs=n_jobs))


# Seeds and blocks ---------------------------------------
def test_same_seed_same_shots(experiment):
    first = list(monte_carlo.simulate_shots(experiment, 5000, SeedSpec(master_seed=7)))
    second = list(monte_carlo.simulate_shots(experiment, 5000, SeedSpec(master_seed=7)))
    other = list(monte_carlo.simulate_shots(experiment, 5000, SeedSpec(master_seed=8)))
    assert first == second
    assert first != other


def test_block_sizes():
    assert monte_carlo._block_sizes(1) == [1]
    assert monte_carlo._block_sizes(2 * BLOCK_SIZE + 5) == [BLOCK_SIZE, BLOCK_SIZE, 5]
    with pytest.raises(ValidationError):
        monte_carlo._block_sizes(0)


def test_seed_must_fit_in_64_bits():
    with pytest.raises(ValidationError):
        SeedSpec(master_seed=2 ** 64)


def test_too_many_herald_detectors():
    with pytest.raises(ValidationError):
        monte_carlo.simulate_blocks(ExperimentConfig(m_subtract=65), 10)


def test_parallel_blocks_match_sequential(experiment):
    shots = 2 * BLOCK_SIZE + 100
    sequential = _tally(experiment, shots)
    parallel = _tally(experiment, shots, n_jobs=2)
    np.testing.assert_array_equal(sequential.source_counts, parallel.source_counts)
    np.testing.assert_array_equal(sequential.pnrd_counts, parallel.pnrd_counts)
    assert sequential.heralded_shots == parallel.heralded_shots


# Shot records -------------------------------------------
def test_shot_bookkeeping(experiment):
    for record in monte_carlo.simulate_shots(experiment, 2000):
        assert record.n_transmitted + record.n_reflected_detected <= record.n_source
        assert record.pnrd_clicks <= min(record.n_transmitted, experiment.N_pnrd)
        assert record.heralded == (record.herald_clicks == 1)


def test_no_subtraction_heralds_everything():
    config = ExperimentConfig(n_th=2, R=0.0, m_subtract=0)
    shots = _tally(config, 10000)
    assert shots.heralded_shots == shots.total_shots == 10000
    assert monte_carlo.heralding_rate(shots) == (1.0, 0.0)


def test_dark_clicks_alone_can_herald():
    config = ExperimentConfig(n_th=2, R=0.0, m_subtract=2, dark_click_probability=1.0)
    assert _tally(config, 1000).heralded_shots == 1000


def test_single_record_is_point_mass():
    record = ShotRecord(n_source=5, n_transmitted=3, n_reflected_detected=1,
                        herald_clicks=1, heralded=True, pnrd_clicks=2)
    p = monte_carlo.empirical_distribution([record])
    assert p.n_max == 3
    assert p.probs[3] == 1.0


def test_empty_selection():
    record = ShotRecord(n_source=2, n_transmitted=2, n_reflected_detected=0,
                        herald_clicks=0, heralded=False, pnrd_clicks=0)
    with pytest.raises(ConditioningError):
        monte_carlo.empirical_distribution([record])
    with pytest.raises(ConditioningError):
        monte_carlo.tally([])
    with pytest.raises(ValidationError):
        monte_carlo.empirical_distribution([record], selector='reflected')


def test_record_and_block_tallies_agree(experiment):
    block = next(monte_carlo.simulate_blocks(experiment, 3000))
    by_block = monte_carlo.tally([block])
    by_record = monte_carlo.tally(block.records(), N_pnrd=experiment.N_pnrd)
    np.testing.assert_array_equal(by_block.source_counts, by_record.source_counts)
    np.testing.assert_array_equal(by_block.heralded_counts, by_record.heralded_counts)
    np.testing.assert_array_equal(by_block.pnrd_counts, by_record.pnrd_counts)
    assert by_block.heralded_shots == by_record.heralded_shots


def test_tally_merge_is_associative(experiment):
    a, b, c = [monte_carlo.tally([block])
               for block in monte_carlo.simulate_blocks(experiment, 2 * BLOCK_SIZE + 1000)]
    left = a.merge(b).merge(c)
    right = a.merge(b.merge(c))
    for name in ['source_counts', 'heralded_counts', 'pnrd_counts']:
        np.testing.assert_array_equal(getattr(left, name), getattr(right, name))
    assert left.total_shots == right.total_shots == 2 * BLOCK_SIZE + 1000


def test_click_histogram_requires_channel_count():
    record = ShotRecord(n_source=1, n_transmitted=1, n_reflected_detected=0,
                        herald_clicks=0, heralded=True, pnrd_clicks=1)
    with pytest.raises(ValidationError):
        monte_carlo.click_histogram([record])
    assert list(monte_carlo.click_histogram([record], N_pnrd=2).counts) == [0, 1, 0]


# Statistics against the exact model ---------------------
@pytest.mark.slow
@pytest.mark.parametrize('m', [0, 1, 3])
def test_heralding_rate_matches_model(m):
    config = ExperimentConfig(n_th=2, R=0.05, eta_collect=1.0, m_subtract=m)
    rate, error = monte_carlo.heralding_rate(_tally(config, 1000000))
    exact = herald(config).success_probability
    assert abs(rate - exact) <= 3 * max(error, 1e-12)


@pytest.mark.slow
@pytest.mark.parametrize('m', [0, 1])
def test_heralded_distribution_matches_model(m):
    shots = 1000000
    config = ExperimentConfig(n_th=2, R=0.05, eta_collect=1.0, m_subtract=m)
    exact = herald(config).output
    heralded = monte_carlo.empirical_distribution(_tally(config, shots, SeedSpec(master_seed=m)))
    assert total_variation(heralded, exact) < 3 * math.sqrt(exact.n_max / shots)


@pytest.mark.slow
def test_source_statistics(experiment):
    shots = _tally(experiment, 1000000)
    source = monte_carlo.empirical_distribution(shots, 'source')
    assert total_variation(source, thermal_pmf(2)) < 0.005
    assert monte_carlo.g2_estimate(shots) == pytest.approx(2.0, abs=0.03)


@pytest.mark.slow
def test_heralded_mean_grows_with_subtractions():
    means = []
    for m in range(4):
        config = ExperimentConfig(n_th=2, R=0.05, eta_collect=1.0, m_subtract=m)
        shots = _tally(config, 3000000, SeedSpec(master_seed=100 + m))
        stats = moments(monte_carlo.empirical_distribution(shots))
        sigma = math.sqrt(stats.variance / shots.heralded_shots)
        assert abs(stats.mean - herald(config).output.mean) <= 3 * sigma
        small_R = ExperimentConfig(n_th=2, R=1e-4, eta_collect=1.0, m_subtract=m)
        assert herald(small_R).output.mean == pytest.approx(2 * (m + 1), abs=0.01)
        means.append(stats.mean)
    assert np.all(np.diff(means) > 0)


@pytest.mark.slow
def test_simulated_clicks_match_forward_model():
    shots = 1000000
    config = ExperimentConfig(n_th=2, m_subtract=0, eta_pnrd=0.5)
    hist = monte_carlo.click_histogram(_tally(config, shots, SeedSpec(master_seed=13)))
    p = herald(config).output
    predicted = predicted_click_probabilities(forward_matrix(8, 0.5, p.n_max), p)
    sigma = np.sqrt(predicted * (1 - predicted) / shots)
    assert hist.total_shots == hist.heralded_shots == shots
    assert np.all(np.abs(hist.frequencies - predicted) <= 4 * sigma + 1e-12)


@pytest.mark.slow
def test_multimode_source_fano():
    config = ExperimentConfig(n_th=2, M_modes=4, m_subtract=0)
    source = monte_carlo.empirical_distribution(_tally(config, 1000000), 'source')
    assert moments(source).fano == pytest.approx(1.5, abs=0.015)


# Detector alone -----------------------------------------
def test_single_channel_is_on_off_detector():
    shots = 200000
    hist = monte_carlo.simulate_click_histogram(thermal_pmf(2), 1, 0.6, shots)
    expected = 1 - 1 / (1 + 0.6 * 2)
    assert hist.heralded_shots == hist.total_shots == shots
    assert hist.frequencies[1] == pytest.approx(expected, abs=4 * math.sqrt(0.25 / shots))


def test_click_histogram_matches_forward_model():
    shots = 200000
    p = subtracted_thermal_pmf(1, 1)
    hist = monte_carlo.simulate_click_histogram(p, 8, 0.6, shots, SeedSpec(master_seed=11))
    predicted = predicted_click_probabilities(forward_matrix(8, 0.6, p.n_max), p)
    sigma = np.sqrt(predicted * (1 - predicted) / shots)
    assert np.all(np.abs(hist.frequencies - predicted) <= 4 * sigma + 1e-12)
