import numpy as np
import pytest

from smoothcopula.estimation.ranks import ObservationMatrix
from smoothcopula.models.copula_models import CopulaFamily, model_from_tau, model_sample


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def clayton():
    return model_from_tau(CopulaFamily.CLAYTON, 0.5)


@pytest.fixture
def tie_free_sample(clayton):
    """30 continuous bivariate Clayton draws (no ties almost surely)."""
    return model_sample(clayton, 30, seed=7)


@pytest.fixture
def sample_3d():
    return model_sample(model_from_tau(CopulaFamily.GUMBEL_HOUGAARD, 0.25, d=3), 25, seed=11)


@pytest.fixture
def tied_sample():
    values = np.array([
        [0.1, 0.5],
        [0.4, 0.2],
        [0.4, 0.9],
        [0.7, 0.2],
        [0.9, 0.6],
    ])
    return ObservationMatrix(values)
