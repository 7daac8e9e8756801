"""Long-running statistical checks; run with ``pytest -m slow``."""
import numpy as np
import pytest

from smoothcopula.estimation.estimators import (EstimatorHandle, EstimatorTag, SmoothSpec, SurvivalCopula,
                                                margin_defect, mixture_oracle)
from smoothcopula.estimation.ranks import maximal_ranks
from smoothcopula.estimation.smoothing_margins import MarginFamily
from smoothcopula.models.copula_models import CopulaFamily, CopulaModel, model_from_tau, model_sample
from smoothcopula.schemas import ExperimentConfig
from smoothcopula.shared.rng import make_generator
from smoothcopula.shared.utils.file_handler import load_sweep_config
from smoothcopula.simulation.benchmark import run_experiment, run_sweep
from smoothcopula.simulation.sequential import equivalence_check
from smoothcopula.validation.copula_checks import check_genuine_copula
from smoothcopula.validation.grammar import parse_estimator

pytestmark = pytest.mark.slow

INDEP = SurvivalCopula.independence()
EBC_PILOT = SurvivalCopula.empirical_beta()
MODELS = [
    CopulaModel(CopulaFamily.INDEPENDENCE),
    model_from_tau(CopulaFamily.CLAYTON, 0.5),
    model_from_tau(CopulaFamily.FRANK, -0.3),
]
ORACLE_SPECS = [
    SmoothSpec(MarginFamily.binomial(), EBC_PILOT),
    SmoothSpec(MarginFamily.beta_binomial(2.0), INDEP),
    SmoothSpec(MarginFamily.beta_binomial(2.5), EBC_PILOT),
    SmoothSpec(MarginFamily.beta(2.0), INDEP),
    SmoothSpec(MarginFamily.beta(1.5), EBC_PILOT),
    SmoothSpec(MarginFamily.beta_binomial(2.0), SurvivalCopula.fixed(model_from_tau(CopulaFamily.CLAYTON, 0.3))),
]


def test_binomial_smoothing_equals_the_empirical_beta_copula():
    rng = make_generator(101)
    spec = SmoothSpec(MarginFamily.binomial(), INDEP)
    for trial in range(200):
        d = 2 + trial % 2
        n = int(rng.integers(2, 101))
        sample = model_sample(model_from_tau(CopulaFamily.GUMBEL_HOUGAARD, 0.3, d=d), n, seed=trial)
        ranks = maximal_ranks(sample)
        points = rng.random((50, d))
        np.testing.assert_allclose(EstimatorHandle(ranks, spec).evaluate(points),
                                   EstimatorHandle(ranks, EstimatorTag.EMPIRICAL_BETA).evaluate(points), atol=1e-12)


@pytest.mark.parametrize("n", [10, 50, 200])
def test_uniform_margins(n):
    ranks = maximal_ranks(model_sample(model_from_tau(CopulaFamily.CLAYTON, 0.5), n, seed=n))
    for text in ("binomial", "binomial:pilot=ebc", "beta-binomial:rho=4", "beta-binomial:rho=2:pilot=ebc"):
        assert margin_defect(EstimatorHandle(ranks, parse_estimator(text)), 101) <= 1e-12, text
    for text in ("beta:rho=4", "beta:rho=0.5:pilot=ebc"):
        assert margin_defect(EstimatorHandle(ranks, parse_estimator(text)), 101) <= 1.0 / (2 * n) + 1e-12, text


@pytest.mark.parametrize("text", ["ecdf", "ebc", "binomial", "binomial:pilot=ebc", "beta-binomial:rho=4",
                                  "beta-binomial:rho=4:pilot=ebc", "beta:rho=2", "beta:rho=2:pilot=ebc",
                                  "beta-binomial:rho=4:fixed-pilot=survival-clayton:tau=0.3"])
def test_genuine_copula_on_many_boxes(text):
    ranks = maximal_ranks(model_sample(model_from_tau(CopulaFamily.FRANK, 0.4), 30, seed=5))
    is_copula, report = check_genuine_copula(EstimatorHandle(ranks, parse_estimator(text)), n_boxes=1000,
                                             seed=8, margin_tolerance=None)
    assert is_copula, report


def test_closed_form_matches_the_mixture_definition():
    rng = make_generator(202)
    for trial in range(50):
        spec = ORACLE_SPECS[trial % len(ORACLE_SPECS)]
        n = int(rng.integers(3, 11))
        sample = model_sample(MODELS[trial % len(MODELS)], n, seed=1000 + trial)
        handle = EstimatorHandle(maximal_ranks(sample), spec)
        u = rng.random(2)
        oracle = mixture_oracle(handle, u, mc_samples=1_000_000, seed=trial)
        assert abs(oracle.value - handle.evaluate(u)) <= 4.0 * oracle.std_error + 1e-12, (trial, spec, u)


def test_unbiased_under_independence():
    config = ExperimentConfig(model="independence", n=30, reps=2000, integration_nodes=256,
                              estimators=["binomial"], seed=7)
    performance = run_experiment(config).performances["binomial:pilot=indep"]
    assert performance.isb <= 3.0 * performance.se_isb


@pytest.mark.parametrize("preset", ["clayton_comparison", "frank_comparison", "gumbel3d_comparison"])
def test_beta_binomial_smoothing_beats_the_empirical_beta_copula(preset):
    config = load_sweep_config(preset).expand()[0]
    performances = run_experiment(config).performances
    ebc = performances["ebc"]
    smooth = performances["beta-binomial:rho=4:pilot=ebc"]
    margin = ebc.imse - smooth.imse
    assert margin > 2.0 * np.hypot(ebc.se_imse, smooth.se_imse)


@pytest.mark.parametrize("text", ["binomial", "beta-binomial:rho=4", "beta:rho=2"])
def test_sequential_processes_merge(text):
    rows = equivalence_check(CopulaModel(CopulaFamily.INDEPENDENCE), parse_estimator(text), [50, 100, 200, 400],
                             reps=50, seed=17)
    inversions = []
    for previous, current in zip(rows, rows[1:]):
        if current.median_sup > previous.median_sup:
            inversions.append(current.median_sup - previous.median_sup
                              <= 2.0 * np.hypot(previous.se_median, current.se_median))
    assert len(inversions) <= 1
    assert all(inversions)


def _small_config(**update):
    settings = dict(model="clayton:tau=0.5", n=20, reps=2000, integration_nodes=256,
                    estimators=["ebc", "beta-binomial:rho=4:pilot=ebc"], seed=31)
    settings.update(update)
    return ExperimentConfig(**settings)


def test_standard_errors_shrink_with_replications():
    short = run_experiment(_small_config()).performances
    long = run_experiment(_small_config(reps=4000)).performances
    for label in short:
        ratio = long[label].se_imse / short[label].se_imse
        assert ratio == pytest.approx(1.0 / np.sqrt(2.0), rel=0.2)


def test_node_count_stability():
    coarse = run_experiment(_small_config(integration_nodes=512)).performances
    fine = run_experiment(_small_config(integration_nodes=2048)).performances
    for label in coarse:
        gap = abs(coarse[label].imse - fine[label].imse)
        assert gap < 2.0 * np.hypot(coarse[label].se_imse, fine[label].se_imse)


def test_imse_decreases_with_n():
    rows = run_sweep(load_sweep_config("clayton_n_sweep"))
    by_estimator = {}
    for row in rows:
        by_estimator.setdefault(row.estimator, []).append(row)
    for label, series in by_estimator.items():
        for previous, current in zip(series, series[1:]):
            assert current.imse <= previous.imse + 2.0 * np.hypot(previous.se_imse, current.se_imse), label
