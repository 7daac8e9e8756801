"""
Maximal ranks, pseudo-observations and tie diagnostics.

Ranks are maximal ranks: the rank of X_ij inside a window is the number of
window values in column j that are <= X_ij. Ties are reported, never broken.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from smoothcopula.shared.errors import DomainError


@dataclass(frozen=True)
class ObservationMatrix:
    """n x d matrix of finite observations, one row per time point."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise DomainError(f"observations must be a 2-d matrix, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 2:
            raise DomainError(f"need n >= 1 rows and d >= 2 columns, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("observations must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RankMatrix:
    """Window-local maximal ranks with one tie flag per column."""

    ranks: np.ndarray
    ties_present: Tuple[bool, ...] = field(default=())

    def __post_init__(self):
        ranks = np.array(self.ranks, dtype=np.int64)
        if ranks.ndim != 2:
            raise DomainError(f"ranks must be a 2-d matrix, got shape {ranks.shape}")
        if ranks.size and (ranks.min() < 1 or ranks.max() > ranks.shape[0]):
            raise DomainError("ranks must lie in 1..m")
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)
        if not self.ties_present:
            flags = tuple(bool(len(np.unique(col)) < len(col)) for col in ranks.T)
            object.__setattr__(self, "ties_present", flags)

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def d(self) -> int:
        return self.ranks.shape[1]

    @property
    def any_ties(self) -> bool:
        return any(self.ties_present)


def _as_matrix(sample) -> np.ndarray:
    if isinstance(sample, ObservationMatrix):
        return sample.values
    return ObservationMatrix(np.asarray(sample)).values


def column_maximal_ranks(column: np.ndarray) -> np.ndarray:
    """#{t : x_t <= x_i} for every i of a 1-d array."""
    column = np.asarray(column)
    return np.searchsorted(np.sort(column), column, side="right").astype(np.int64)


def maximal_ranks(sample, window: Optional[Tuple[int, int]] = None) -> RankMatrix:
    """
    Maximal ranks of the rows k..l (1-based, inclusive) of ``sample``.

    Args:
        sample: ObservationMatrix or array-like of shape (n, d)
        window: pair (k, l) with 1 <= k <= l <= n; defaults to the full sample

    Returns:
        RankMatrix of shape (l - k + 1, d)
    """
    values = _as_matrix(sample)
    n = values.shape[0]
    k, l = window if window is not None else (1, n)
    if not (1 <= k <= l <= n):
        raise DomainError(f"invalid window ({k}, {l}) for a sample of size {n}")

    block = values[k - 1:l]
    ranks = np.column_stack([column_maximal_ranks(block[:, j]) for j in range(block.shape[1])])
    return RankMatrix(ranks, ties_present=tuple(detect_ties(block)))


def pseudo_observations(ranks: RankMatrix, offset: float = 0.0) -> np.ndarray:
    """(rank - offset) / m with offset 0 or 1/2."""
    if offset not in (0.0, 0.5):
        raise DomainError(f"offset must be 0 or 0.5, got {offset}")
    return (ranks.ranks - offset) / ranks.n


def detect_ties(sample) -> Tuple[bool, ...]:
    """One flag per column: True iff that column holds duplicate values."""
    values = np.asarray(sample.values if isinstance(sample, ObservationMatrix) else sample, dtype=float)
    flags = []
    for column in values.T:
        ordered = np.sort(column)
        flags.append(bool(np.any(ordered[1:] == ordered[:-1])))
    return tuple(flags)
