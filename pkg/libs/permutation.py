"""
Permutation engine: uniform reorderings, exact enumeration for small n,
p-values and the distribution-free tabulation cache.

Every statistic here is a function of the rank vector, so permutations act on
ranks and the null distribution of a statistic depends only on n (and on the
window g and bandwidth b_n). That is what makes tabulate_null valid for every
tie-free series of the same length.
"""

import itertools
import logging
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import stats

from config import settings
from libs import kernels, seeding
from libs.errors import ConfigError, DomainError, LimitError
from libs.series import TimeSeries, check_window, rank_array
from libs.variance import bandwidth_default

logger = logging.getLogger('trendperm.permutation')

TABLE_FORMAT_VERSION = 1
SIDES = ('greater', 'less', 'two_sided')
# rows of permuted ranks evaluated per kernel call
CHUNK_CELLS = 2_000_000

STATISTIC_CODES = {
    'global_mk': kernels.GLOBAL_MK,
    'global_unstud': kernels.GLOBAL_UNSTUD,
    'global_stud': kernels.GLOBAL_STUD,
    'local_mk': kernels.LOCAL_MK,
    'local_unstud': kernels.LOCAL_UNSTUD,
    'local_stud': kernels.LOCAL_STUD,
    'local_sum': kernels.LOCAL_SUM,
}
LOCAL_KINDS = ('local_mk', 'local_unstud', 'local_stud', 'local_sum')
STUDENTIZED_KINDS = ('global_stud', 'local_stud')


@dataclass(frozen=True)
class RankStatistic:
    """ A rank statistic by kind.\n
        ✅ global_mk: U_n | global_unstud: √n·U_n | global_stud: √n·U_n/σ̂_n\n
        ✅ local_mk: V_n | local_unstud: √(nG)·V_n | local_stud: √(nG)·V_n/τ̂_n\n
        ✅ local_sum: Σ Y_i\n
        The studentizer is recomputed on every arrangement it is evaluated on.
    """
    kind: str
    g: Optional[int] = None
    b_n: Optional[int] = None
    eps: float = settings.EPS

    def __post_init__(self):
        if self.kind not in STATISTIC_CODES:
            raise DomainError(f"unknown statistic kind {self.kind!r}; expected one of {sorted(STATISTIC_CODES)}")
        if self.kind in LOCAL_KINDS and self.g is None:
            raise DomainError(f"statistic {self.kind!r} needs a window g")
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")

    @property
    def code(self):
        return STATISTIC_CODES[self.kind]

    @property
    def studentized(self):
        return self.kind in STUDENTIZED_KINDS

    def params(self, n):
        """ (g, b) as passed to the kernels for series length n; 0 marks an unused slot."""
        g = check_window(self.g, n) if self.kind in LOCAL_KINDS else 0
        if not self.studentized:
            return g, 0
        if self.b_n is None:
            return g, bandwidth_default(n)
        return g, check_window(self.b_n, n, name='b_n')

    def bandwidth(self, n):
        return self.params(n)[1] or None

    def with_bandwidth(self, b_n):
        return RankStatistic(self.kind, g=self.g, b_n=b_n, eps=self.eps)

    def __call__(self, ranks):
        ranks = np.ascontiguousarray(ranks, dtype=np.int64)
        g, b = self.params(ranks.shape[0])
        return float(kernels.evaluate(self.code, ranks, g, b, self.eps))

    def batch(self, rank_matrix):
        rank_matrix = np.ascontiguousarray(rank_matrix, dtype=np.int64)
        g, b = self.params(rank_matrix.shape[1])
        return kernels.evaluate_batch(self.code, rank_matrix, g, b, self.eps)

    def observe(self, series: TimeSeries):
        return self(rank_array(series))


StatisticLike = Union[RankStatistic, str, Callable]


def as_statistic(statistic: StatisticLike, b_n=None):
    if isinstance(statistic, str):
        statistic = RankStatistic(statistic)
    if isinstance(statistic, RankStatistic) and b_n is not None:
        statistic = statistic.with_bandwidth(b_n)
    return statistic


def _kind_of(statistic):
    if isinstance(statistic, RankStatistic):
        return statistic.kind
    return getattr(statistic, '__name__', 'custom')


def _evaluate_rows(statistic, rank_matrix):
    if isinstance(statistic, RankStatistic):
        return statistic.batch(rank_matrix)
    return np.array([float(statistic(row)) for row in rank_matrix], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class PermutationDistribution:
    values: np.ndarray  # sorted ascending
    mode: str  # 'sampled' | 'exact'
    statistic_kind: str
    n: int
    b_n: Optional[int] = None
    g: Optional[int] = None
    B: Optional[int] = None
    seed: Optional[int] = None
    eps: Optional[float] = None
    stream_key: tuple = field(default=())

    def __post_init__(self):
        values = np.sort(np.asarray(self.values, dtype=np.float64))
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def size(self):
        return int(self.values.shape[0])

    def __len__(self):
        return self.size

    def mean(self):
        return float(self.values.mean())

    def variance(self):
        """Population variance of the multiset (divides by its size)."""
        return float(self.values.var())

    def quantile(self, q):
        if not 0 <= q <= 1:
            raise DomainError(f"quantile level must lie in [0, 1], got {q}")
        return float(np.quantile(self.values, q, method='inverted_cdf'))

    def cdf(self, x):
        return np.searchsorted(self.values, x, side='right') / self.size

    def count_ge(self, x, tol=0.0):
        return self.size - int(np.searchsorted(self.values, x - tol, side='left'))

    def count_le(self, x, tol=0.0):
        return int(np.searchsorted(self.values, x + tol, side='right'))

    def ks_distance(self, other: 'PermutationDistribution'):
        return float(stats.ks_2samp(self.values, other.values).statistic)

    def masses(self):
        """ {value: relative frequency} over the distinct values."""
        uniq, counts = np.unique(self.values, return_counts=True)
        return dict(zip(uniq.tolist(), (counts / self.size).tolist()))


@dataclass(frozen=True)
class PValue:
    p: float
    side: str
    B: Optional[int]
    observed: float
    count: Optional[int]  # permuted values at least as extreme on the reported side


def check_side(side):
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")
    return side


def sample_permutation(seed_stream, n):
    """ Uniform draw from S_n as a 1-based array; deterministic given the stream state."""
    if n < 1:
        raise DomainError(f"permutation size must be >= 1, got {n}")
    return seeding.get_rng(seed_stream).permutation(n) + 1


def _check_count(B):
    if int(B) != B or B < 1:
        raise DomainError(f"number of permutations must be an integer >= 1, got {B}")
    return int(B)


def _sampled_values(ranks, statistic, B, seed, stream_key):
    n = ranks.shape[0]
    key = seeding.philox_key(seed, *stream_key)
    chunk = max(1, CHUNK_CELLS // n)
    values = np.empty(B, dtype=np.float64)
    for start in range(0, B, chunk):
        stop = min(B, start + chunk)
        perms = seeding.sample_permutations(key, start, stop, n)
        values[start:stop] = _evaluate_rows(statistic, kernels.permute_rows(ranks, perms))
    return values


def _sampled_from_ranks(ranks, statistic, B, seed, stream_key=()):
    n = ranks.shape[0]
    B = _check_count(B)
    values = _sampled_values(ranks, statistic, B, int(seed), tuple(stream_key))
    g, b = statistic.params(n) if isinstance(statistic, RankStatistic) else (0, 0)
    return PermutationDistribution(
        values=values, mode='sampled', statistic_kind=_kind_of(statistic), n=n,
        b_n=b or None, g=g or None, B=B, seed=int(seed),
        eps=getattr(statistic, 'eps', None), stream_key=tuple(stream_key),
    )


def permutation_distribution(series: TimeSeries, statistic: StatisticLike, B: int = settings.N_PERMS,
                             seed: int = 0, b_n: Optional[int] = None, stream_key=()) -> PermutationDistribution:
    """ Statistic evaluated on B uniformly permuted copies of the series' ranks.\n
        ✅ permutation b comes from the Philox stream (seed, *stream_key) at counter block b\n
        ✅ reproducible given (seed, stream_key) no matter how it is scheduled
    """
    statistic = as_statistic(statistic, b_n)
    return _sampled_from_ranks(rank_array(series), statistic, B, seed, stream_key)


def _all_permutations(n):
    return np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)


def exact_permutation_distribution(n: int, statistic: StatisticLike, b_n: Optional[int] = None,
                                   limit: Optional[int] = None) -> PermutationDistribution:
    """ Statistic over all n! arrangements of the ranks 1..n."""
    limit = settings.ENUMERATION_LIMIT if limit is None else limit
    if n > limit:
        raise LimitError(f"exact enumeration needs n <= {limit}, got n={n} ({n}! arrangements)")
    if n < 2:
        raise DomainError(f"exact enumeration needs n >= 2, got {n}")
    statistic = as_statistic(statistic, b_n)
    values = _evaluate_rows(statistic, _all_permutations(n))
    g, b = statistic.params(n) if isinstance(statistic, RankStatistic) else (0, 0)
    return PermutationDistribution(
        values=values, mode='exact', statistic_kind=_kind_of(statistic), n=n,
        b_n=b or None, g=g or None, eps=getattr(statistic, 'eps', None),
    )


def p_value(dist: PermutationDistribution, observed: float, side: str = settings.SIDE) -> PValue:
    """ Randomization p-value.\n
        ✅ sampled: (1 + #{permuted >= observed}) / (B + 1) for side=greater, mirrored for less\n
        ✅ exact: #{permuted >= observed} / n! (the observed arrangement is in the multiset)\n
        ✅ two_sided: twice the smaller one-sided value, capped at 1
    """
    check_side(side)
    if dist.size == 0:
        raise DomainError("p-value needs a nonempty permutation distribution")
    observed = float(observed)
    # the same kernel yields the observed and permuted values; tol absorbs summation-order noise
    tol = 1e-12 * max(1.0, abs(observed)) if np.isfinite(observed) else 0.0
    ge = dist.count_ge(observed, tol)
    le = dist.count_le(observed, tol)
    if dist.mode == 'sampled':
        p_greater = (1 + ge) / (dist.size + 1)
        p_less = (1 + le) / (dist.size + 1)
    else:
        p_greater = max(ge, 1) / dist.size
        p_less = max(le, 1) / dist.size
    if side == 'greater':
        p, count = p_greater, ge
    elif side == 'less':
        p, count = p_less, le
    else:
        p, count = min(1.0, 2.0 * min(p_greater, p_less)), min(ge, le)
    return PValue(p=float(p), side=side, B=dist.B, observed=observed, count=count)


# TABULATION CACHE
_TABLES = {}
_TABLES_LOCK = threading.Lock()


def _table_key(statistic, n, B, seed):
    g, b = statistic.params(n)
    return (statistic.kind, n, g or None, b or None, statistic.eps, B, None if B is None else int(seed))


def tabulate_null(n: int, b_n: Optional[int], statistic_kind: str, B: Optional[int] = settings.N_PERMS,
                  seed: int = 0, g: Optional[int] = None, eps: float = settings.EPS) -> PermutationDistribution:
    """ Permutation null computed once on the identity series (1, ..., n) and cached.\n
        ✅ B=None enumerates all n! arrangements\n
        ✅ valid for every tie-free series of length n (rank statistic)\n
        ✅ same key twice returns the same object
    """
    statistic = RankStatistic(statistic_kind, g=g, b_n=b_n, eps=eps)
    key = _table_key(statistic, n, B, seed)
    table = _TABLES.get(key)
    if table is not None:
        logger.debug(f"tabulate_null() > cache hit {key}")
        return table
    if B is None:
        table = exact_permutation_distribution(n, statistic)
    else:
        table = _sampled_from_ranks(np.arange(1, n + 1, dtype=np.int64), statistic, B, seed)
    with _TABLES_LOCK:
        return _TABLES.setdefault(key, table)


def clear_tables():
    with _TABLES_LOCK:
        _TABLES.clear()


def table_filename(dist: PermutationDistribution):
    B = 'exact' if dist.B is None else f"B{dist.B}_s{dist.seed}"
    return f"{dist.statistic_kind}_n{dist.n}_g{dist.g or 0}_b{dist.b_n or 0}_{B}.npz"


def _opt(value):
    return -1 if value is None else value


def save_table(dist: PermutationDistribution, path=None):
    """ Writes a tabulated null to .npz (format_version, key fields and sorted values); returns the path."""
    if path is None:
        os.makedirs(settings.TABLE_DIR, exist_ok=True)
        path = os.path.join(settings.TABLE_DIR, table_filename(dist))
    with open(path, 'wb') as fh:
        np.savez(
            fh,
            format_version=np.int64(TABLE_FORMAT_VERSION),
            statistic_kind=np.str_(dist.statistic_kind),
            mode=np.str_(dist.mode),
            n=np.int64(dist.n),
            g=np.int64(_opt(dist.g)),
            b_n=np.int64(_opt(dist.b_n)),
            B=np.int64(_opt(dist.B)),
            seed=np.int64(_opt(dist.seed)),
            eps=np.float64(np.nan if dist.eps is None else dist.eps),
            values=dist.values,
        )
    return path


def load_table(path) -> PermutationDistribution:
    try:
        with np.load(path, allow_pickle=False) as data:
            version = int(data['format_version'])
            if version != TABLE_FORMAT_VERSION:
                raise ConfigError(f"{path}: table format version {version}, expected {TABLE_FORMAT_VERSION}")

            def opt(name):
                value = int(data[name])
                return None if value < 0 else value

            eps = float(data['eps'])
            return PermutationDistribution(
                values=np.array(data['values']), mode=str(data['mode']),
                statistic_kind=str(data['statistic_kind']), n=int(data['n']),
                b_n=opt('b_n'), g=opt('g'), B=opt('B'), seed=opt('seed'),
                eps=None if np.isnan(eps) else eps,
            )
    except KeyError as e:
        raise ConfigError(f"{path}: missing field {e} in permutation table")
