# monte_carlo.py
# Event-by-event simulation of the subtraction experiment. Every shot draws
# a photon number from the (multimode) thermal source, splits the quanta one
# by one at the beam splitter, spreads the collected reflected quanta over the
# m heralding on-off detectors and the transmitted quanta over the N channels
# of the multiplexed verification detector (PNRD).
#
# Shots are produced in fixed blocks of BLOCK_SIZE. Block b draws from its own
# Philox stream keyed by (master_seed, stream_id, b), so the output depends
# only on the seed, the configuration and the shot index, and blocks can be
# simulated in parallel with identical results.

from dataclasses import dataclass, field
import math
import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from SubtractionScripts.fock_distributions import PhotonDistribution
from SubtractionScripts.subtraction_utils import ConditioningError, ValidationError
from SubtractionScripts.subtraction_utils import check_count, check_probability


BLOCK_SIZE = 65536
MAX_HERALD_CHANNELS = 64
SELECTORS = ['source', 'transmitted-heralded']


# Types --------------------------------------------------
@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 2017
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= check_count(self.master_seed, 'master_seed') < 2 ** 64:
            raise ValidationError('[ERROR] master_seed must fit in 64 bits.')
        check_count(self.stream_id, 'stream_id')

    def generator(self, block):
        """
        Independent random stream of one block of shots.
        :param block: (int) block index
        :return: (np.random.Generator)
        """
        sequence = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, block))
        return np.random.Generator(np.random.Philox(sequence))


@dataclass(frozen=True)
class ShotRecord:
    """herald_clicks is a bit pattern: bit i set if herald channel i fired."""
    n_source: int
    n_transmitted: int
    n_reflected_detected: int
    herald_clicks: int
    heralded: bool
    pnrd_clicks: int


@dataclass(frozen=True, eq=False)
class ShotBlock:
    """Columnar record of the shots start..start + len - 1."""
    start: int
    m_subtract: int
    N_pnrd: int
    n_source: np.ndarray
    n_transmitted: np.ndarray
    n_reflected_detected: np.ndarray
    herald_clicks: np.ndarray
    heralded: np.ndarray
    pnrd_clicks: np.ndarray

    def __len__(self):
        return len(self.n_source)

    def __iter__(self):
        return self.records()

    def records(self):
        for i in range(len(self)):
            yield ShotRecord(n_source=int(self.n_source[i]),
                             n_transmitted=int(self.n_transmitted[i]),
                             n_reflected_detected=int(self.n_reflected_detected[i]),
                             herald_clicks=int(self.herald_clicks[i]),
                             heralded=bool(self.heralded[i]),
                             pnrd_clicks=int(self.pnrd_clicks[i]))


@dataclass(frozen=True, eq=False)
class ClickHistogram:
    """counts[j]: heralded shots in which exactly j PNRD channels fired."""
    counts: np.ndarray
    total_shots: int
    heralded_shots: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 1 or len(counts) < 2 or np.any(counts < 0):
            raise ValidationError('[ERROR] Click counts must be a non-negative vector over j = 0..N.')
        if int(counts.sum()) != self.heralded_shots or self.heralded_shots > self.total_shots:
            raise ValidationError('[ERROR] Click counts must sum to heralded_shots <= total_shots.')
        counts.setflags(write=False)
        object.__setattr__(self, 'counts', counts)

    @property
    def N(self):
        return len(self.counts) - 1

    @property
    def frequencies(self):
        if self.heralded_shots == 0:
            raise ConditioningError('[ERROR] Click histogram holds no heralded shots.')
        return self.counts / self.heralded_shots


def _one_hot(n):
    return np.eye(1, n + 1, n, dtype=np.int64).ravel()


def _add_histograms(a, b):
    size = max(len(a), len(b))
    total = np.zeros(size, dtype=np.int64)
    total[:len(a)] += a
    total[:len(b)] += b
    return total


@dataclass
class ShotTally:
    """
    Single-pass aggregate of simulated shots. Tallies merge associatively, so
    blocks may be aggregated in any order.
    """
    N_pnrd: int
    source_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    heralded_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    pnrd_counts: np.ndarray = None
    total_shots: int = 0
    heralded_shots: int = 0

    def __post_init__(self):
        if self.pnrd_counts is None:
            size = 0 if self.N_pnrd is None else self.N_pnrd + 1
            self.pnrd_counts = np.zeros(size, dtype=np.int64)

    def add_block(self, block):
        heralded = block.heralded
        self.source_counts = _add_histograms(self.source_counts, np.bincount(block.n_source))
        self.heralded_counts = _add_histograms(
            self.heralded_counts, np.bincount(block.n_transmitted[heralded]))
        self.pnrd_counts = _add_histograms(
            self.pnrd_counts, np.bincount(block.pnrd_clicks[heralded], minlength=self.N_pnrd + 1))
        self.total_shots += len(block)
        self.heralded_shots += int(heralded.sum())
        return self

    def add_record(self, record):
        if self.N_pnrd is not None and record.pnrd_clicks > self.N_pnrd:
            raise ValidationError('[ERROR] Record has {} clicks on a {}-channel detector.'.format(
                record.pnrd_clicks, self.N_pnrd))
        self.source_counts = _add_histograms(self.source_counts, _one_hot(record.n_source))
        if record.heralded:
            self.heralded_counts = _add_histograms(self.heralded_counts, _one_hot(record.n_transmitted))
            self.pnrd_counts = _add_histograms(self.pnrd_counts, _one_hot(record.pnrd_clicks))
            self.heralded_shots += 1
        self.total_shots += 1
        return self

    def merge(self, other):
        if other.N_pnrd != self.N_pnrd:
            raise ValidationError('[ERROR] Cannot merge tallies of different detectors.')
        return ShotTally(N_pnrd=self.N_pnrd,
                         source_counts=_add_histograms(self.source_counts, other.source_counts),
                         heralded_counts=_add_histograms(self.heralded_counts, other.heralded_counts),
                         pnrd_counts=_add_histograms(self.pnrd_counts, other.pnrd_counts),
                         total_shots=self.total_shots + other.total_shots,
                         heralded_shots=self.heralded_shots + other.heralded_shots)

    def click_histogram(self):
        if self.N_pnrd is None:
            raise ValidationError('[ERROR] N_pnrd is required to histogram shot records.')
        return ClickHistogram(counts=self.pnrd_counts.copy(), total_shots=self.total_shots,
                              heralded_shots=self.heralded_shots)


# Sampling -----------------------------------------------
def sample_source(rng, n_th, M, size):
    """
    Total photon number of M thermal modes with overall mean n_th, as a sum
    of M geometric draws by inverse CDF.
    :param rng: (np.random.Generator)
    :param n_th: (float) overall mean
    :param M: (int) number of modes
    :param size: (int) number of shots
    :return: (np.ndarray of int64)
    """
    if n_th == 0:
        return np.zeros(size, dtype=np.int64)
    mode_mean = n_th / M
    log_ratio = math.log(mode_mean / (1.0 + mode_mean))
    uniforms = 1.0 - rng.random((size, M))  # in (0, 1]
    return np.floor(np.log(uniforms) / log_ratio).astype(np.int64).sum(axis=1)


def _hit_channels(rng, owners, channels, size):
    """Number of distinct channels hit per shot when quanta owned by shots land uniformly."""
    landing = rng.integers(0, channels, size=len(owners))
    hits = np.unique(owners * channels + landing)
    return np.bincount(hits // channels, minlength=size)


def _simulate_block(config, seed, block, size):
    rng = seed.generator(block)
    m = config.m_subtract

    n_source = sample_source(rng, config.n_th, config.M_modes, size)
    owners = np.repeat(np.arange(size), n_source)
    reflected = rng.random(len(owners)) < config.R
    collected = reflected & (rng.random(len(owners)) < config.eta_collect)
    transmitted = ~reflected

    herald_clicks = np.zeros(size, dtype=np.uint64)
    if m > 0:
        landing = rng.integers(0, m, size=int(collected.sum())).astype(np.uint64)
        np.bitwise_or.at(herald_clicks, owners[collected], np.left_shift(np.uint64(1), landing))
        if config.dark_click_probability > 0:
            bits = np.left_shift(np.uint64(1), np.arange(m, dtype=np.uint64))
            dark = rng.random((size, m)) < config.dark_click_probability
            herald_clicks |= np.bitwise_or.reduce(np.where(dark, bits, np.uint64(0)), axis=1)
    heralded = herald_clicks == np.uint64(2 ** m - 1)

    detected = transmitted & (rng.random(len(owners)) < config.eta_pnrd)
    pnrd_clicks = _hit_channels(rng, owners[detected], config.N_pnrd, size)

    return ShotBlock(start=block * BLOCK_SIZE, m_subtract=m, N_pnrd=config.N_pnrd,
                     n_source=n_source,
                     n_transmitted=np.bincount(owners[transmitted], minlength=size),
                     n_reflected_detected=np.bincount(owners[collected], minlength=size),
                     herald_clicks=herald_clicks, heralded=heralded, pnrd_clicks=pnrd_clicks)


def _block_sizes(shots):
    shots = check_count(shots, 'shots', minimum=1)
    n_blocks = -(-shots // BLOCK_SIZE)
    return [min(BLOCK_SIZE, shots - b * BLOCK_SIZE) for b in range(n_blocks)]


def _run_blocks(task, args, sizes, n_jobs, progress):
    if n_jobs == 1:
        results = (task(*args, b, size) for b, size in enumerate(sizes))
    else:
        results = Parallel(n_jobs=n_jobs, return_as='generator')(
            delayed(task)(*args, b, size) for b, size in enumerate(sizes))
    for result in tqdm(results, total=len(sizes), disable=not progress):
        yield result


# Simulation ---------------------------------------------
def simulate_blocks(config, shots, seed=SeedSpec(), n_jobs=1, progress=False):
    """
    Simulates the experiment block by block.
    :param config: (ExperimentConfig)
    :param shots: (int) >= 1
    :param seed: (SeedSpec)
    :param n_jobs: (int) joblib workers; blocks are yielded in shot order
    :param progress: (bool) show a tqdm progress bar
    :return: (generator) of ShotBlock
    """
    if config.m_subtract > MAX_HERALD_CHANNELS:
        raise ValidationError('[ERROR] At most {} heralding detectors can be simulated.'.format(
            MAX_HERALD_CHANNELS))
    sizes = _block_sizes(shots)
    return _run_blocks(_simulate_block, (config, seed), sizes, n_jobs, progress)


def simulate_shots(config, shots, seed=SeedSpec(), n_jobs=1, progress=False):
    """
    Stream of individual shot records of the simulated experiment.
    :return: (generator) of ShotRecord
    """
    for block in simulate_blocks(config, shots, seed, n_jobs, progress):
        yield from block.records()


def tally(records, N_pnrd=None):
    """
    Aggregates ShotBlocks or ShotRecords.
    :param records: (iterable) of ShotBlock or ShotRecord
    :param N_pnrd: (int) channel count, required when only records are given
    :return: (ShotTally)
    """
    result = None
    for item in records:
        if result is None:
            result = ShotTally(N_pnrd=item.N_pnrd if isinstance(item, ShotBlock) else N_pnrd)
        if isinstance(item, ShotBlock):
            result.add_block(item)
        else:
            result.add_record(item)
    if result is None:
        raise ConditioningError('[ERROR] No shots to aggregate.')
    return result


def empirical_distribution(records, selector='transmitted-heralded'):
    """
    Normalized photon-number histogram of the selected shots.
    :param records: (iterable) of ShotBlock / ShotRecord, or a ShotTally
    :param selector: (str) 'source' or 'transmitted-heralded'
    :return: (PhotonDistribution)
    """
    if selector not in SELECTORS:
        raise ValidationError('[ERROR] Selector must be one of {}.'.format(SELECTORS))
    shots = records if isinstance(records, ShotTally) else tally(records)
    counts = shots.source_counts if selector == 'source' else shots.heralded_counts
    if counts.sum() == 0:
        raise ConditioningError('[ERROR] Selection "{}" contains no shots.'.format(selector))
    return PhotonDistribution.from_counts(counts)


def click_histogram(records, N_pnrd=None):
    """
    Histogram of PNRD click numbers over heralded shots.
    :param records: (iterable) of ShotBlock / ShotRecord, or a ShotTally
    :param N_pnrd: (int) required when only records are given
    :return: (ClickHistogram)
    """
    shots = records if isinstance(records, ShotTally) else tally(records, N_pnrd)
    return shots.click_histogram()


def heralding_rate(shots):
    """
    Fraction of heralded shots and its binomial standard error.
    :param shots: (ShotTally)
    :return: (tuple) rate, standard error
    """
    rate = shots.heralded_shots / shots.total_shots
    return rate, math.sqrt(rate * (1.0 - rate) / shots.total_shots)


def g2_estimate(shots, selector='source'):
    """
    Second-order correlation <n(n-1)>/<n>^2 of the selected photon numbers.
    :param shots: (ShotTally)
    :param selector: (str)
    :return: (float)
    """
    counts = shots.source_counts if selector == 'source' else shots.heralded_counts
    n = np.arange(len(counts), dtype=float)
    total = counts.sum()
    mean = math.fsum(n * counts) / total
    if mean == 0:
        raise ConditioningError('[ERROR] g2 is undefined for a vacuum selection.')
    return math.fsum(n * (n - 1) * counts) / total / mean ** 2


# PNRD alone ---------------------------------------------
def _simulate_click_block(probs, N, eta, seed, block, size):
    rng = seed.generator(block)
    n = rng.choice(len(probs), size=size, p=probs)
    owners = np.repeat(np.arange(size), n)
    detected = rng.random(len(owners)) < eta
    clicks = _hit_channels(rng, owners[detected], N, size)
    return np.bincount(clicks, minlength=N + 1)


def simulate_click_histogram(p, N, eta, shots, seed=SeedSpec(), n_jobs=1, progress=False):
    """
    Drives the N-channel detector alone with photon numbers drawn from p.
    :param p: (PhotonDistribution)
    :param N: (int) channels
    :param eta: (float) detection efficiency
    :param shots: (int)
    :param seed: (SeedSpec)
    :return: (ClickHistogram) with every shot counted as heralded
    """
    N = check_count(N, 'N', minimum=1)
    eta = check_probability(eta, 'eta')
    sizes = _block_sizes(shots)
    counts = np.zeros(N + 1, dtype=np.int64)
    for block_counts in _run_blocks(_simulate_click_block, (p.probs, N, eta, seed),
                                    sizes, n_jobs, progress):
        counts += block_counts
    return ClickHistogram(counts=counts, total_shots=int(sum(sizes)), heralded_shots=int(sum(sizes)))
