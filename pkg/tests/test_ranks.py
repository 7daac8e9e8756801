import numpy as np
import pytest

from smoothcopula.estimation.ranks import (ObservationMatrix, RankMatrix, column_maximal_ranks, detect_ties,
                                           maximal_ranks, pseudo_observations)
from smoothcopula.shared.errors import DomainError


class TestObservationMatrix:
    def test_accepts_finite_matrix(self):
        sample = ObservationMatrix(np.arange(6.0).reshape(3, 2))
        assert (sample.n, sample.d) == (3, 2)
        assert not sample.values.flags.writeable

    @pytest.mark.parametrize("values", [
        np.arange(4.0),
        np.zeros((3, 1)),
        np.array([[0.1, np.nan], [0.2, 0.3]]),
        np.array([[0.1, np.inf], [0.2, 0.3]]),
    ])
    def test_rejects_invalid_shapes_and_values(self, values):
        with pytest.raises(DomainError):
            ObservationMatrix(values)


class TestMaximalRanks:
    def test_maximal_ranks_count_values_at_most(self):
        np.testing.assert_array_equal(column_maximal_ranks(np.array([0.3, 0.1, 0.3, 0.2])), [4, 1, 4, 2])

    def test_tie_free_ranks_are_permutations(self, tie_free_sample):
        ranks = maximal_ranks(tie_free_sample)
        assert not ranks.any_ties
        for j in range(ranks.d):
            np.testing.assert_array_equal(np.sort(ranks.ranks[:, j]), np.arange(1, ranks.n + 1))

    def test_ties_are_reported_not_broken(self, tied_sample):
        ranks = maximal_ranks(tied_sample)
        assert ranks.ties_present == (True, True)
        np.testing.assert_array_equal(ranks.ranks[:, 0], [1, 3, 3, 4, 5])
        np.testing.assert_array_equal(ranks.ranks[:, 1], [3, 2, 5, 2, 4])

    def test_window_ranks_are_recomputed(self, tied_sample):
        ranks = maximal_ranks(tied_sample, window=(2, 4))
        assert ranks.n == 3
        np.testing.assert_array_equal(ranks.ranks[:, 0], [2, 2, 3])
        np.testing.assert_array_equal(ranks.ranks[:, 1], [2, 3, 2])
        assert ranks.ties_present == (True, True)

    def test_window_without_ties(self, tied_sample):
        ranks = maximal_ranks(tied_sample, window=(4, 5))
        assert not ranks.any_ties

    @pytest.mark.parametrize("window", [(0, 2), (3, 2), (1, 6)])
    def test_invalid_windows(self, tied_sample, window):
        with pytest.raises(DomainError):
            maximal_ranks(tied_sample, window=window)

    @pytest.mark.parametrize("sample_name", ["tie_free_sample", "tied_sample"])
    def test_invariant_under_increasing_transforms(self, request, sample_name):
        sample = request.getfixturevalue(sample_name)
        ranks = maximal_ranks(sample).ranks
        transformed = np.column_stack([np.exp(sample.values[:, 0]), 3.0 * sample.values[:, 1] ** 3 - 2.0])
        np.testing.assert_array_equal(maximal_ranks(transformed).ranks, ranks)
        window = maximal_ranks(sample, window=(2, 4)).ranks
        np.testing.assert_array_equal(maximal_ranks(transformed, window=(2, 4)).ranks, window)

    def test_accepts_plain_arrays(self):
        ranks = maximal_ranks([[0.2, 0.9], [0.1, 0.8]])
        np.testing.assert_array_equal(ranks.ranks, [[2, 2], [1, 1]])


class TestPseudoObservations:
    def test_offsets(self):
        ranks = RankMatrix(np.array([[1, 2], [2, 1]]))
        np.testing.assert_allclose(pseudo_observations(ranks), [[0.5, 1.0], [1.0, 0.5]])
        np.testing.assert_allclose(pseudo_observations(ranks, offset=0.5), [[0.25, 0.75], [0.75, 0.25]])

    def test_rejects_other_offsets(self):
        with pytest.raises(DomainError):
            pseudo_observations(RankMatrix(np.array([[1, 1]])), offset=0.25)

    def test_rank_matrix_range(self):
        with pytest.raises(DomainError):
            RankMatrix(np.array([[1, 3], [2, 1]]))


def test_detect_ties(tied_sample, tie_free_sample):
    assert detect_ties(tied_sample) == (True, True)
    assert detect_ties(tie_free_sample) == (False, False)
    assert detect_ties(np.array([[0.1, 0.2], [0.3, 0.2]])) == (False, True)
