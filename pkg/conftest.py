import pytest

from SubtractionScripts.channels import ExperimentConfig
from SubtractionScripts.fock_distributions import TruncationPolicy


@pytest.fixture
def tight_policy():
    return TruncationPolicy(tail_tolerance=1e-20)


@pytest.fixture
def table_policy():
    return TruncationPolicy(tail_tolerance=1e-15)


@pytest.fixture
def experiment():
    return ExperimentConfig(n_th=2.0, R=0.05, eta_collect=1.0, m_subtract=1)


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / 'results'
    path.mkdir()
    return str(path)
