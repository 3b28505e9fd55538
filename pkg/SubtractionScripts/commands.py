# commands.py
# Table-producing operations of the lab: moments, work and information per
# number of subtracted quanta, reflectivity and mode-number sweeps, the Monte
# Carlo run and the reconstruction of photon statistics from click data.
# Every command takes a RunConfig and returns ResultTables; lab.py writes them.

from dataclasses import asdict, dataclass, field, replace
from functools import partial
import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from SubtractionScripts.channels import ExperimentConfig, herald
from SubtractionScripts.fock_distributions import TruncationPolicy
from SubtractionScripts.fock_distributions import multimode_thermal_pmf
from SubtractionScripts.fock_distributions import subtracted_multimode_thermal_pmf
from SubtractionScripts.fock_distributions import subtracted_thermal_pmf
from SubtractionScripts.monte_carlo import SeedSpec, ShotTally, empirical_distribution
from SubtractionScripts.monte_carlo import heralding_rate, simulate_blocks
from SubtractionScripts.monte_carlo import simulate_click_histogram
from SubtractionScripts.parameters import EXPERIMENT_DEFAULTS, FORMATS, MODELS
from SubtractionScripts.parameters import RUN_DEFAULTS, SWEEP_DEFAULTS
from SubtractionScripts import read_files
from SubtractionScripts.result_tables import ResultTable, distribution_rows, histogram_rows
from SubtractionScripts.subtraction_utils import ConditioningError, ConvergenceError
from SubtractionScripts.subtraction_utils import ValidationError, check_count, check_probability
from SubtractionScripts import thermo
from SubtractionScripts import tomography


MONOTONE_SLACK = 1e-12
THRESHOLD_MARGIN = 1e-6
VANISHING_FRACTION = 0.01


@dataclass
class RunConfig:
    n_th: float = EXPERIMENT_DEFAULTS['n_th']
    M_modes: int = EXPERIMENT_DEFAULTS['M_modes']
    R: float = EXPERIMENT_DEFAULTS['R']
    eta_collect: float = EXPERIMENT_DEFAULTS['eta_collect']
    m_subtract: int = EXPERIMENT_DEFAULTS['m_subtract']
    N_pnrd: int = EXPERIMENT_DEFAULTS['N_pnrd']
    eta_pnrd: float = EXPERIMENT_DEFAULTS['eta_pnrd']
    dark_click_probability: float = EXPERIMENT_DEFAULTS['dark_click_probability']
    m_list: list = field(default_factory=lambda: list(SWEEP_DEFAULTS['m_list']))
    R_grid: list = field(default_factory=lambda: list(SWEEP_DEFAULTS['R_grid']))
    M_grid: list = field(default_factory=lambda: list(SWEEP_DEFAULTS['M_grid']))
    sweep_r_m: int = SWEEP_DEFAULTS['sweep_r_m']
    sweep_m_m: int = SWEEP_DEFAULTS['sweep_m_m']
    out_dir: str = RUN_DEFAULTS['out_dir']
    fmt: str = RUN_DEFAULTS['fmt']
    seed: int = RUN_DEFAULTS['seed']
    shots: int = RUN_DEFAULTS['shots']
    model: str = RUN_DEFAULTS['model']
    tail_tolerance: float = RUN_DEFAULTS['tail_tolerance']
    jobs: int = RUN_DEFAULTS['jobs']
    n_max: int = RUN_DEFAULTS['n_max']
    histogram: str = RUN_DEFAULTS['histogram']
    max_iters: int = RUN_DEFAULTS['max_iters']
    tol: float = RUN_DEFAULTS['tol']

    def __post_init__(self):
        # YAML 1.1 reads 1e-15 (no dot) as a string
        for name in ['n_th', 'R', 'eta_collect', 'eta_pnrd', 'dark_click_probability',
                     'tail_tolerance', 'tol']:
            try:
                setattr(self, name, float(getattr(self, name)))
            except (TypeError, ValueError):
                raise ValidationError('[ERROR] {} must be a number, got {!r}.'.format(
                    name, getattr(self, name)))
        for name in ['m_list', 'R_grid', 'M_grid']:
            values = getattr(self, name)
            if not isinstance(values, (list, tuple)) or len(values) == 0:
                raise ValidationError('[ERROR] {} must be a non-empty list.'.format(name))
        self.m_list = [check_count(m, 'm') for m in self.m_list]
        self.M_grid = [check_count(M, 'M', minimum=1) for M in self.M_grid]
        self.R_grid = [check_probability(R, 'R') for R in self.R_grid]
        if self.fmt not in FORMATS:
            raise ValidationError('[ERROR] Format must be one of {}, got {}.'.format(FORMATS, self.fmt))
        if self.model not in MODELS:
            raise ValidationError('[ERROR] Model must be one of {}, got {}.'.format(MODELS, self.model))
        check_count(self.shots, 'shots', minimum=1)
        check_count(self.jobs, 'jobs', minimum=-1)
        if self.jobs == 0:
            raise ValidationError('[ERROR] jobs must be a positive worker count or -1.')
        if self.n_max is not None:
            check_count(self.n_max, 'n_max')
        # Validates the experiment fields and the tolerance
        self.experiment()

    @classmethod
    def from_sources(cls, file_values=None, overrides=None):
        """
        Effective configuration: defaults, then file values, then CLI flags.
        :param file_values: (dict) flat mapping read from a config file
        :param overrides: (dict) CLI values; None entries are ignored
        :return: (RunConfig)
        """
        values = {}
        values.update(file_values or {})
        values.update({key: value for key, value in (overrides or {}).items() if value is not None})
        unknown = sorted(set(values) - set(cls.__dataclass_fields__))
        if unknown:
            raise ValidationError('[ERROR] Unknown configuration keys: {}.'.format(unknown))
        return cls(**values)

    def to_dict(self):
        return asdict(self)

    def provenance_dict(self):
        """Configuration entering the config hash; the output location is excluded."""
        values = self.to_dict()
        values.pop('out_dir')
        return values

    @property
    def policy(self):
        return TruncationPolicy(tail_tolerance=self.tail_tolerance)

    def experiment(self, **changes):
        """
        ExperimentConfig of this run with some fields replaced.
        :return: (ExperimentConfig)
        """
        fields = {key: getattr(self, key) for key in EXPERIMENT_DEFAULTS}
        fields.update(changes)
        return ExperimentConfig(policy=self.policy, **fields)


# Helpers ------------------------------------------------
def _evaluate(function, points, jobs, progress=True):
    """Evaluates function over the grid points; results keep grid order."""
    points = tqdm(points, disable=not progress)
    if jobs == 1:
        return [function(point) for point in points]
    return Parallel(n_jobs=jobs)(delayed(function)(point) for point in points)


def _state(run, m, R=None, M=None):
    """
    Photon-number law after subtraction of m quanta and the heralding rate
    (1 for the ideal model).
    """
    M = run.M_modes if M is None else M
    if run.model == 'ideal':
        if M == 1:
            return subtracted_thermal_pmf(run.n_th, m, run.policy), 1.0
        return subtracted_multimode_thermal_pmf(run.n_th, M, m, run.policy), 1.0
    result = herald(run.experiment(m_subtract=m, M_modes=M, R=run.R if R is None else R))
    return result.output, result.success_probability


def _moments_row(p):
    moments = thermo.moments(p)
    return {'mean': moments.mean, 'variance': moments.variance, 'g2': moments.g2,
            'fano': moments.fano, 'mdr': moments.mdr,
            'entropy': thermo.shannon_entropy(p)}


def _monotone(values, increasing=False, strict=False):
    steps = np.diff(np.asarray(values, dtype=float))
    if increasing:
        steps = -steps
    return bool(np.all(steps < 0)) if strict else bool(np.all(steps <= MONOTONE_SLACK))


def _full_columns(run, columns):
    return columns + ['herald_rate'] if run.model == 'full' else columns


def _table(name, rows, columns, run, command, summary=None):
    return ResultTable.from_rows(name, rows, columns, run.provenance_dict(), command, summary)


# Per-m tables -------------------------------------------
def _stats_row(run, m):
    p, rate = _state(run, m)
    row = {'m': m, 'herald_rate': rate}
    row.update(_moments_row(p))
    return row


def cmd_stats(run):
    """
    Mean, variance, g2, Fano factor, MDR and entropy per number of
    subtracted quanta.
    :param run: (RunConfig)
    :return: (list of ResultTable)
    """
    rows = _evaluate(partial(_stats_row, run), run.m_list, run.jobs)
    columns = _full_columns(run, ['m', 'mean', 'variance', 'g2', 'fano', 'mdr', 'entropy'])
    summary = {'entropy_increasing': _monotone([row['entropy'] for row in rows],
                                               increasing=True, strict=True)}
    return [_table('stats_{}'.format(run.model), rows, columns, run, 'stats', summary)]


def _work_row(run, m):
    p, rate = _state(run, m)
    work = thermo.available_work(p, run.n_th, run.M_modes)
    cooling = thermo.work_cooling_benchmark(run.n_th)
    heated = thermo.heated_work_benchmark(run.n_th, m)
    return {'m': m, 'work': work, 'cooling_benchmark': cooling, 'heated_benchmark': heated,
            'above_cooling': work > cooling + THRESHOLD_MARGIN,
            'above_heated': work > heated + THRESHOLD_MARGIN, 'herald_rate': rate}


def cmd_work(run):
    """
    Available work per m against the cooling benchmark ln(1 + n_th) and the
    thermal state heated to the same mean.
    :param run: (RunConfig)
    :return: (list of ResultTable)
    """
    rows = _evaluate(partial(_work_row, run), run.m_list, run.jobs)
    columns = _full_columns(run, ['m', 'work', 'cooling_benchmark', 'heated_benchmark',
                                  'above_cooling', 'above_heated'])
    summary = {'work_increasing': _monotone([row['work'] for row in rows],
                                            increasing=True, strict=True)}
    return [_table('work_{}'.format(run.model), rows, columns, run, 'work', summary)]


def _info_row(run, m):
    p, rate = _state(run, m)
    pE = float(p.probs[0])
    info = thermo.max_mutual_information_z(pE)
    heated = thermo.heated_info_benchmark(run.n_th, m)
    return {'m': m, 'pE': pE, 'info': info, 'heated_info_benchmark': heated,
            'thermal_info_threshold': thermo.thermal_info_benchmark(run.n_th),
            'above_heated_info': info > heated + THRESHOLD_MARGIN, 'herald_rate': rate}


def cmd_info(run):
    """
    Maximal mutual information per m when bit 0 is the vacuum and bit 1 the
    subtracted state, against the thermal benchmarks.
    :param run: (RunConfig)
    :return: (list of ResultTable)
    """
    rows = _evaluate(partial(_info_row, run), run.m_list, run.jobs)
    columns = _full_columns(run, ['m', 'pE', 'info', 'heated_info_benchmark',
                                  'thermal_info_threshold', 'above_heated_info'])
    summary = {'info_increasing': _monotone([row['info'] for row in rows],
                                            increasing=True, strict=True)}
    return [_table('info_{}'.format(run.model), rows, columns, run, 'info', summary)]


# Sweeps -------------------------------------------------
def _sweep_r_row(run, R):
    result = herald(run.experiment(m_subtract=run.sweep_r_m, R=R))
    p = result.output
    m = run.sweep_r_m
    work = thermo.available_work(p, run.n_th, run.M_modes)
    info = thermo.max_mutual_information_z(float(p.probs[0]))
    return {'R': R, 'work': work, 'info': info, 'herald_rate': result.success_probability,
            'above_heated': work > thermo.heated_work_benchmark(run.n_th, m) + THRESHOLD_MARGIN,
            'above_heated_info': info > thermo.heated_info_benchmark(run.n_th, m) + THRESHOLD_MARGIN}


def cmd_sweep_R(run):
    """
    Full-model work and information of the sweep_r_m-subtracted state over the
    reflectivity grid.
    :param run: (RunConfig)
    :return: (list of ResultTable)
    """
    if any(not 0.0 < R <= 1.0 for R in run.R_grid):
        raise ValidationError('[ERROR] Reflectivities must lie in (0, 1].')
    order = np.argsort(run.R_grid, kind='stable')
    grid = [run.R_grid[i] for i in order]
    rows = _evaluate(partial(_sweep_r_row, run), grid, run.jobs)
    summary = {'m': run.sweep_r_m,
               'work_non_increasing': _monotone([row['work'] for row in rows]),
               'info_non_increasing': _monotone([row['info'] for row in rows])}
    columns = ['R', 'work', 'info', 'herald_rate', 'above_heated', 'above_heated_info']
    return [_table('sweep_r', rows, columns, run, 'sweep-r', summary)]


def _sweep_m_row(run, M):
    m = run.sweep_m_m
    thermal = multimode_thermal_pmf(run.n_th, M, run.policy)
    subtracted = subtracted_multimode_thermal_pmf(run.n_th, M, m, run.policy)
    work, work_per_mode = thermo.multimode_work(run.n_th, M, m, run.policy)
    info, info_per_mode = thermo.multimode_information(run.n_th, M, m, run.policy)
    info_per_mode_unsubtracted = thermo.multimode_information(run.n_th, M, 0, run.policy)[1]
    return {'M': M, 'g1': thermo.first_order_coherence(M),
            'entropy_unsubtracted': thermo.shannon_entropy(thermal),
            'entropy': thermo.shannon_entropy(subtracted),
            'work': work, 'work_per_mode': work_per_mode,
            'info': info, 'info_per_mode': info_per_mode,
            'info_per_mode_unsubtracted': info_per_mode_unsubtracted}


def cmd_sweep_M(run):
    """
    Entropy, work and information of M-mode thermal light after incoherent
    subtraction of sweep_m_m quanta, raw and per mode.
    :param run: (RunConfig)
    :return: (list of ResultTable)
    """
    grid = sorted(run.M_grid)
    rows = _evaluate(partial(_sweep_m_row, run), grid, run.jobs)
    per_mode_work = [row['work_per_mode'] for row in rows]
    summary = {'m': run.sweep_m_m,
               'work_per_mode_decreasing': _monotone(per_mode_work, strict=True),
               'info_per_mode_decreasing': _monotone([row['info_per_mode'] for row in rows],
                                                     strict=True),
               'work_per_mode_vanishes': per_mode_work[-1] < VANISHING_FRACTION * per_mode_work[0],
               'entropy_increased': all(row['entropy'] > row['entropy_unsubtracted'] for row in rows),
               'info_increased': all(row['info_per_mode'] > row['info_per_mode_unsubtracted']
                                     for row in rows)}
    columns = ['M', 'g1', 'entropy_unsubtracted', 'entropy', 'work', 'work_per_mode',
               'info', 'info_per_mode_unsubtracted', 'info_per_mode']
    return [_table('sweep_m', rows, columns, run, 'sweep-m', summary)]


# Simulation and reconstruction --------------------------
def cmd_simulate(run, progress=True):
    """
    Simulates run.shots shots of the experiment with m = m_subtract.
    :param run: (RunConfig)
    :param progress: (bool)
    :return: (list of ResultTable) click histogram and shot summary
    """
    config = run.experiment()
    shots = ShotTally(N_pnrd=config.N_pnrd)
    for block in simulate_blocks(config, run.shots, SeedSpec(master_seed=run.seed),
                                 n_jobs=run.jobs, progress=progress):
        shots.add_block(block)

    rate, error = heralding_rate(shots)
    summary = {'total_shots': shots.total_shots, 'heralded_shots': shots.heralded_shots,
               'herald_rate': rate, 'herald_rate_stderr': error}
    try:
        summary['herald_rate_exact'] = herald(config).success_probability
    except ConditioningError:
        summary['herald_rate_exact'] = 0.0

    rows = []
    for selection in ['source', 'transmitted-heralded']:
        try:
            p = empirical_distribution(shots, selection)
        except ConditioningError:
            print('[WARNING] No shots selected as {}.'.format(selection))
            continue
        row = {'selection': selection, 'count': int(shots.total_shots if selection == 'source'
                                                    else shots.heralded_shots)}
        row.update(_moments_row(p))
        rows.append(row)

    histogram = shots.click_histogram()
    return [_table('simulate_histogram', histogram_rows(histogram), ['j', 'count', 'frequency'],
                   run, 'simulate', summary),
            _table('simulate_summary', rows,
                   ['selection', 'count', 'mean', 'variance', 'g2', 'fano', 'mdr', 'entropy'],
                   run, 'simulate', summary)]


def cmd_reconstruct(run, progress=True):
    """
    EM reconstruction of the photon statistics behind a click histogram. Without
    a histogram file the detector is driven by the ideal m_subtract-subtracted
    state to produce one.
    :param run: (RunConfig)
    :param progress: (bool)
    :return: (list of ResultTable) distribution and moments
    """
    if run.histogram is not None:
        histogram = read_files.load_click_histogram(run.histogram, run.N_pnrd)
    else:
        print('[INFO] Simulating {} detector shots of the subtracted state.'.format(run.shots))
        truth = subtracted_thermal_pmf(run.n_th, run.m_subtract, run.policy)
        histogram = simulate_click_histogram(truth, run.N_pnrd, run.eta_pnrd, run.shots,
                                             SeedSpec(master_seed=run.seed), n_jobs=run.jobs,
                                             progress=progress)

    n_max = run.n_max if run.n_max is not None else \
        tomography.default_reconstruction_n_max(run.N_pnrd, run.eta_pnrd)
    model = tomography.forward_matrix(run.N_pnrd, run.eta_pnrd, n_max)
    result = tomography.em_reconstruct(histogram, model, max_iters=run.max_iters, tol=run.tol)
    if not result.converged:
        raise ConvergenceError('[ERROR] EM did not converge within {} iterations.'.format(
            result.iterations))
    print('[INFO] EM converged after {} iterations.'.format(result.iterations))

    summary = {'iterations': result.iterations, 'converged': result.converged,
               'final_log_likelihood': result.final_log_likelihood,
               'floored_bins': result.floored_bins, 'n_max': n_max,
               'heralded_shots': histogram.heralded_shots}
    return [_table('reconstruction', distribution_rows(result.estimate), ['n', 'probability'],
                   run, 'reconstruct', summary),
            _table('reconstruction_moments', [_moments_row(result.estimate)],
                   ['mean', 'variance', 'g2', 'fano', 'mdr', 'entropy'],
                   run, 'reconstruct', summary)]


def figures(run):
    """
    Chains the commands behind every figure: moments, work and information of
    both models, and the two sweeps.
    :param run: (RunConfig)
    :return: (list of ResultTable)
    """
    tables = []
    for model in MODELS:
        model_run = replace(run, model=model)
        for command in [cmd_stats, cmd_work, cmd_info]:
            tables += command(model_run)
    tables += cmd_sweep_R(run)
    tables += cmd_sweep_M(run)
    return tables


COMMANDS = {
    'stats': cmd_stats,
    'work': cmd_work,
    'info': cmd_info,
    'sweep-r': cmd_sweep_R,
    'sweep-m': cmd_sweep_M,
    'simulate': cmd_simulate,
    'reconstruct': cmd_reconstruct,
    'figures': figures
}
