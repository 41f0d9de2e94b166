import numpy as np
import pytest

from dqc1chaos.ensembles import RngStream, sample_cue, sample_poisson
from dqc1chaos.linalg import eigenphases
from dqc1chaos.spectral import form_factor_series

SEED = 20240611


@pytest.fixture
def rng():
    return RngStream(SEED)


@pytest.fixture
def gen():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def cue600_series():
    """Form factors T_1..T_60 of 50 CUE(600) samples (stream k = sample k)."""
    base = RngStream(SEED, 600)
    return [form_factor_series(eigenphases(sample_cue(600, base.child(k))), 60) for k in range(50)]


@pytest.fixture(scope="session")
def poisson600_series():
    base = RngStream(SEED, 601)
    return [form_factor_series(eigenphases(sample_poisson(600, base.child(k))), 60) for k in range(50)]
