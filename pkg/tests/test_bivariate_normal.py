import math

import numpy as np
import pytest
from scipy import stats

from smoothcopula.models.bivariate_normal import bivariate_normal_cdf, bivariate_normal_upper


class TestBivariateNormal:
    @pytest.mark.parametrize("r", [-0.9, -0.5, 0.0, 0.25, 0.6, 0.95])
    def test_origin_has_closed_form(self, r):
        assert bivariate_normal_cdf(0.0, 0.0, r) == pytest.approx(0.25 + math.asin(r) / (2.0 * math.pi), abs=1e-13)

    def test_zero_correlation_is_a_product(self):
        x = np.array([-2.0, -0.3, 0.0, 1.1, 2.5])
        y = np.array([0.4, -1.2, 0.7, 0.0, -0.5])
        expected = stats.norm.cdf(x) * stats.norm.cdf(y)
        np.testing.assert_allclose(bivariate_normal_cdf(x, y, 0.0), expected, atol=1e-14)

    @pytest.mark.parametrize("r", [-0.8, -0.2, 0.5, 0.9])
    def test_agrees_with_scipy(self, r):
        grid = np.linspace(-2.5, 2.5, 7)
        x, y = np.meshgrid(grid, grid)
        reference = stats.multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, r], [r, 1.0]])
        expected = reference.cdf(np.column_stack([x.ravel(), y.ravel()]))
        np.testing.assert_allclose(bivariate_normal_cdf(x.ravel(), y.ravel(), r), expected, atol=2e-5)

    def test_upper_orthant_symmetry(self):
        h, k, r = 0.3, -0.7, 0.4
        assert bivariate_normal_upper(h, k, r) == pytest.approx(bivariate_normal_cdf(-h, -k, r), abs=1e-15)

    def test_extreme_limits(self):
        assert bivariate_normal_cdf(-50.0, 0.0, 0.3) == pytest.approx(0.0, abs=1e-300)
        assert bivariate_normal_cdf(50.0, 50.0, 0.3) == pytest.approx(1.0, abs=1e-15)
