from .estimation.estimators import (EstimatorHandle, EstimatorTag, SmoothSpec, SurvivalCopula, mixture_oracle,
                                    smooth_estimator)
from .estimation.ranks import ObservationMatrix, maximal_ranks
from .estimation.smoothing_margins import MarginFamily
from .models.copula_models import CopulaFamily, CopulaModel, model_cdf, model_sample
from .simulation.benchmark import run_experiment, sweep
from .simulation.sequential import ProcessGrid, equivalence_check, process_values
from .validation.grammar import parse_estimator, parse_model

__all__ = [
    "ObservationMatrix",
    "maximal_ranks",
    "MarginFamily",
    "EstimatorTag",
    "SmoothSpec",
    "SurvivalCopula",
    "EstimatorHandle",
    "smooth_estimator",
    "mixture_oracle",
    "CopulaFamily",
    "CopulaModel",
    "model_cdf",
    "model_sample",
    "run_experiment",
    "sweep",
    "ProcessGrid",
    "process_values",
    "equivalence_check",
    "parse_estimator",
    "parse_model",
]
