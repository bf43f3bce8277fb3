"""
Series core: validated sample paths, ranks, the empirical CDF at the sample
points and the global/local Mann-Kendall statistics.

All statistics are computed from the rank vector with integer pair counts;
the only floating point operation is the final normalisation.
"""

from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence, Union

import numpy as np

from libs import kernels
from libs.errors import DomainError, TieError


@dataclass(frozen=True)
class RandomBreak:
    """Tie policy: break ties by a seeded fair shuffle among tied entries."""
    seed: int


TiePolicy = Union[str, RandomBreak]  # "reject" or RandomBreak(seed)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    values: np.ndarray
    tie_break_seed: Optional[int] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DomainError(f"series must be one-dimensional, got shape {values.shape}")
        if values.shape[0] < 2:
            raise DomainError(f"series needs at least 2 values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise DomainError("series contains NaN or infinite values")
        if self.tie_break_seed is None and has_ties(values):
            raise TieError("series contains tied values; pass a RandomBreak tie policy to allow them")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def n(self):
        return int(self.values.shape[0])

    def __len__(self):
        return self.n

    def with_values(self, values):
        """Same tie policy, new values."""
        return TimeSeries(values, tie_break_seed=self.tie_break_seed)

    def reversed(self):
        return self.with_values(self.values[::-1])


@dataclass(frozen=True, eq=False)
class RankVector:
    ranks: np.ndarray  # int64, 1-based

    @property
    def n(self):
        return int(self.ranks.shape[0])

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class LocalIncrements:
    y: np.ndarray  # int64
    G: int

    @property
    def n(self):
        return int(self.y.shape[0])

    def total(self):
        return int(self.y.sum())


def has_ties(values):
    values = np.asarray(values, dtype=np.float64)
    return np.unique(values).shape[0] != values.shape[0]


def validate_series(raw: Sequence[float], tie_policy: TiePolicy = 'reject') -> TimeSeries:
    """ Validates raw values into a TimeSeries.\n
        ✅ length >= 2, all finite\n
        ✅ tie_policy='reject' raises TieError on duplicates\n
        ✅ RandomBreak(seed) keeps duplicates, ranked by a seeded shuffle
    """
    if isinstance(tie_policy, RandomBreak):
        return TimeSeries(raw, tie_break_seed=int(tie_policy.seed))
    if tie_policy != 'reject':
        raise DomainError(f"unknown tie policy {tie_policy!r}")
    return TimeSeries(raw)


def rank_array(series: TimeSeries):
    """Writable int64 1-based ranks, ties broken by the series seed when allowed."""
    values = series.values
    if series.tie_break_seed is None:
        order = np.argsort(values, kind='stable')
    else:
        rng = np.random.default_rng(series.tie_break_seed)
        keys = rng.permutation(series.n)
        # primary key: value, secondary: random key (fair shuffle within ties)
        order = np.lexsort((keys, values))
    out = np.empty(series.n, dtype=np.int64)
    out[order] = np.arange(1, series.n + 1, dtype=np.int64)
    return out


def ranks(series: TimeSeries) -> RankVector:
    r = rank_array(series)
    r.setflags(write=False)
    return RankVector(r)


def ecdf_at_samples(series: TimeSeries) -> np.ndarray:
    """F̂_n(X_i) = rank_i / n."""
    return ranks(series).ranks / series.n


def pair_sum_from_ranks(r) -> int:
    return int(kernels.global_pair_sum(np.ascontiguousarray(r, dtype=np.int64)))


def global_mk(series: TimeSeries) -> float:
    """U_n via merge-sort inversion counting, O(n log n)."""
    s = pair_sum_from_ranks(rank_array(series))
    return s / comb(series.n, 2)


def pair_sum_bruteforce(series: TimeSeries) -> int:
    """Direct double loop; the oracle for global_mk."""
    r = rank_array(series).tolist()
    n = len(r)
    total = 0
    for i in range(n - 1):
        ri = r[i]
        for j in range(i + 1, n):
            total += (r[j] > ri) - (r[j] < ri)
    return total


def check_window(g, n, name='g'):
    if int(g) != g or g < 1 or g > n - 1:
        raise DomainError(f"{name} must be an integer in [1, {n - 1}], got {g}")
    return int(g)


def local_pair_sum(series: TimeSeries, g: int) -> int:
    """n·g·V_n as an exact integer."""
    g = check_window(g, series.n)
    return int(kernels.local_pair_sum(rank_array(series), g))


def local_tail_pair_sum(series: TimeSeries, g: int) -> int:
    """Pairs i < j inside the last g observations; the part of sum(Y) that V_n leaves out."""
    g = check_window(g, series.n)
    tail = rank_array(series)[series.n - g:]
    return pair_sum_from_ranks(np.argsort(np.argsort(tail)) + 1)


def local_mk(series: TimeSeries, g: int) -> float:
    g = check_window(g, series.n)
    return local_pair_sum(series, g) / (series.n * g)


def local_increments(series: TimeSeries, G: int) -> LocalIncrements:
    G = check_window(G, series.n, name='G')
    y = kernels.local_increments(rank_array(series), G)
    y.setflags(write=False)
    return LocalIncrements(y=y, G=G)
