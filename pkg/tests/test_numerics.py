import math

import numpy as np
import pytest
from scipy import stats

from smoothcopula.estimation import numerics
from smoothcopula.estimation.numerics import ShapePair
from smoothcopula.shared.errors import DomainError


class TestSpecialFunctions:
    def test_log_gamma_matches_factorials(self):
        for k in range(1, 15):
            assert numerics.log_gamma(k + 1) == pytest.approx(math.log(math.factorial(k)), rel=1e-14)

    def test_log_gamma_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            numerics.log_gamma(0.0)
        with pytest.raises(DomainError):
            numerics.log_gamma(np.array([1.0, -2.0]))

    def test_reg_inc_beta_uniform_and_symmetric_cases(self):
        x = np.linspace(0.0, 1.0, 21)
        np.testing.assert_allclose(numerics.reg_inc_beta(x, ShapePair(1.0, 1.0)), x, atol=1e-15)
        for a in (0.5, 2.0, 7.5):
            assert numerics.reg_inc_beta(0.5, ShapePair(a, a)) == pytest.approx(0.5, abs=1e-14)

    def test_reg_inc_beta_returns_scalars_for_scalars(self):
        value = numerics.reg_inc_beta(0.3, ShapePair(2.0, 3.0))
        assert isinstance(value, float)

    def test_reg_inc_beta_rejects_points_outside_unit_interval(self):
        with pytest.raises(DomainError):
            numerics.reg_inc_beta(1.2, ShapePair(2.0, 3.0))

    def test_inverse_inverts(self):
        shapes = ShapePair(2.5, 4.0)
        p = np.linspace(0.01, 0.99, 50)
        x = numerics.inv_reg_inc_beta(p, shapes)
        np.testing.assert_allclose(numerics.reg_inc_beta(x, shapes), p, atol=1e-12)
        assert numerics.inv_reg_inc_beta(0.0, shapes) == 0.0
        assert numerics.inv_reg_inc_beta(1.0, shapes) == 1.0

    @pytest.mark.parametrize("a, b", [(0.0, 1.0), (1.0, -1.0), (np.inf, 1.0)])
    def test_shape_pair_validation(self, a, b):
        with pytest.raises(DomainError):
            ShapePair(a, b)

    def test_beta_survival_complements_cdf(self):
        shapes = ShapePair(3.0, 1.5)
        w = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(numerics.beta_survival(shapes, w) + numerics.reg_inc_beta(w, shapes),
                                   1.0, atol=1e-15)


class TestBinomialSurvival:
    """Pr(S > r - 1) for S ~ Bin(n, t) equals I_t(r, n + 1 - r)."""

    def test_beta_binomial_identity_full_enumeration(self):
        t = np.linspace(0.0, 1.0, 41)
        for n in range(1, 21):
            table = numerics.binomial_survival_table(n, t)
            for r in range(1, n + 1):
                expected = numerics.reg_inc_beta(t, ShapePair(r, n + 1 - r))
                np.testing.assert_allclose(numerics.binomial_survival_gt(n, t, r - 1), expected, atol=1e-12)
                np.testing.assert_allclose(table[:, r - 1], expected, atol=1e-12)

    def test_floor_semantics(self):
        n, t = 8, 0.35
        assert numerics.binomial_survival_gt(n, t, -0.5) == 1.0
        assert numerics.binomial_survival_gt(n, t, n) == 0.0
        assert numerics.binomial_survival_gt(n, t, 2.7) == numerics.binomial_survival_gt(n, t, 2)

    def test_exact_endpoints(self):
        assert numerics.binomial_survival_gt(5, 0.0, 0) == 0.0
        assert numerics.binomial_survival_gt(5, 1.0, 4) == 1.0

    def test_rejects_invalid_trials(self):
        with pytest.raises(DomainError):
            numerics.binomial_survival_gt(0, 0.5, 1)
        with pytest.raises(DomainError):
            numerics.binomial_survival_gt(2.5, 0.5, 1)

    def test_pmf_table_sums_to_one(self):
        pmf = numerics.binomial_pmf_table(30, np.array([0.0, 0.2, 0.9, 1.0]))
        np.testing.assert_allclose(pmf.sum(axis=-1), 1.0, atol=1e-13)


class TestBetaBinomialSurvival:
    @pytest.mark.parametrize("n, a, b", [(5, 0.7, 2.0), (20, 3.0, 3.0), (40, 12.5, 0.4)])
    def test_matches_scipy_enumeration(self, n, a, b):
        k = np.arange(-1, n + 1)
        expected = stats.betabinom.sf(k, n, a, b)
        np.testing.assert_allclose(numerics.beta_binomial_survival_gt(n, ShapePair(a, b), k), expected,
                                   atol=1e-12)

    def test_scalar_threshold(self):
        value = numerics.beta_binomial_survival_gt(10, ShapePair(2.0, 5.0), 3)
        assert isinstance(value, float)
        assert 0.0 < value < 1.0

    def test_table_rejects_nonpositive_shapes(self):
        with pytest.raises(DomainError):
            numerics.beta_binomial_pmf_table(5, 0.0, 1.0)
