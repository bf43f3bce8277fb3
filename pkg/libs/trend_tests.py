"""
Trend tests: studentized and unstudentized global Mann-Kendall permutation
tests, the classical Mann-Kendall test and the local tests of order M.

Every permutation test compares the observed statistic with its own
permutation null, studentizer included: the variance estimate is recomputed on
each permuted arrangement.
"""

from dataclasses import asdict, dataclass, field
from math import comb, sqrt
from typing import Optional

from scipy.special import ndtr

from config import settings
from libs import permutation
from libs.errors import DomainError
from libs.permutation import PValue, RankStatistic
from libs.series import TimeSeries, check_window, global_mk, local_increments, local_mk, pair_sum_from_ranks, rank_array
from libs.variance import VarianceEstimate, global_variance, local_variance

METHODS = ('global_stud', 'global_unstud', 'classical', 'local_stud', 'local_unstud')
LOCAL_METHODS = ('local_stud', 'local_unstud')


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    method: str
    statistic: float
    studentizer: Optional[VarianceEstimate]
    p_value: PValue
    alpha: float
    reject: bool
    side: str
    n: int
    M: Optional[int] = None
    B: Optional[int] = None
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    @property
    def p(self):
        return self.p_value.p

    def to_dict(self):
        """ Flat record for machine-readable output."""
        record = {
            'method': self.method,
            'statistic': self.statistic,
            'p': self.p_value.p,
            'reject': self.reject,
            'alpha': self.alpha,
            'side': self.side,
            'n': self.n,
            'M': self.M,
            'B': self.B,
            'seed': self.seed,
        }
        if self.studentizer is not None:
            record.update({f"studentizer_{k}": v for k, v in asdict(self.studentizer).items()})
        record.update(self.details)
        return record

    def to_lines(self):
        return [f"{key}={_fmt(value)}" for key, value in self.to_dict().items() if value is not None]


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def normalize_method(method: str) -> str:
    name = method.replace('-', '_')
    if name not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    return name


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_global_length(series):
    if series.n < 3:
        raise DomainError(f"global tests need n >= 3, got {series.n}")


def _null(series, statistic, B, seed, stream_key, tabulated):
    """ B=None: exact (tabulated) enumeration; tabulated=True: cached null on the identity series."""
    n = series.n
    if B is None:
        return permutation.tabulate_null(n, statistic.b_n, statistic.kind, None, g=statistic.g, eps=statistic.eps)
    if tabulated:
        return permutation.tabulate_null(n, statistic.b_n, statistic.kind, B, seed, g=statistic.g, eps=statistic.eps)
    return permutation.permutation_distribution(series, statistic, B, seed, stream_key=stream_key)


def _permutation_test(method, series, statistic, alpha, side, B, seed, stream_key, tabulated, studentizer=None, M=None):
    alpha = _check_alpha(alpha)
    permutation.check_side(side)
    observed = statistic.observe(series)
    dist = _null(series, statistic, B, seed, stream_key, tabulated)
    p = permutation.p_value(dist, observed, side)
    return TestReport(
        method=method, statistic=observed, studentizer=studentizer, p_value=p, alpha=alpha,
        reject=p.p <= alpha, side=side, n=series.n, M=M, B=dist.B, seed=dist.seed,
        details={'null_mode': dist.mode},
    )


def global_studentized_test(series: TimeSeries, alpha=settings.ALPHA, side=settings.SIDE, B=settings.N_PERMS,
                            seed=0, b_n=None, eps=settings.EPS, stream_key=(), tabulated=False) -> TestReport:
    """ Rejects for large √n·U_n/σ̂_n against its permutation null.\n
        ✅ B=None enumerates all n! arrangements (n <= enumeration limit)
    """
    _check_global_length(series)
    studentizer = global_variance(series, b_n, eps)
    statistic = RankStatistic('global_stud', b_n=studentizer.bandwidth, eps=eps)
    return _permutation_test('global_stud', series, statistic, alpha, side, B, seed, stream_key, tabulated, studentizer)


def global_unstudentized_test(series: TimeSeries, alpha=settings.ALPHA, side=settings.SIDE, B=settings.N_PERMS,
                              seed=0, stream_key=(), tabulated=False) -> TestReport:
    _check_global_length(series)
    statistic = RankStatistic('global_unstud')
    return _permutation_test('global_unstud', series, statistic, alpha, side, B, seed, stream_key, tabulated)


def classical_mk_test(series: TimeSeries, alpha=settings.ALPHA, side=settings.SIDE) -> TestReport:
    """ Classical Mann-Kendall test.\n
        ✅ n <= enumeration limit: exact null G_n of U_n\n
        ✅ otherwise z = S / sqrt(n(n-1)(2n+5)/18), no continuity correction
    """
    alpha = _check_alpha(alpha)
    permutation.check_side(side)
    n = series.n
    u = global_mk(series)
    if n <= settings.ENUMERATION_LIMIT:
        null = permutation.tabulate_null(n, None, 'global_mk', None)
        p = permutation.p_value(null, u, side)
        details = {'null_mode': 'exact'}
    else:
        s = pair_sum_from_ranks(rank_array(series))
        z = s / sqrt(n * (n - 1) * (2 * n + 5) / 18)
        p_greater, p_less = float(ndtr(-z)), float(ndtr(z))
        p_side = {'greater': p_greater, 'less': p_less, 'two_sided': min(1.0, 2.0 * min(p_greater, p_less))}[side]
        p = PValue(p=p_side, side=side, B=None, observed=u, count=None)
        details = {'null_mode': 'normal', 'S': s, 'z': z}
    return TestReport(
        method='classical', statistic=u, studentizer=None, p_value=p, alpha=alpha,
        reject=p.p <= alpha, side=side, n=n, details=details,
    )


def local_studentized_test(series: TimeSeries, M: int, alpha=settings.ALPHA, side=settings.SIDE, B=settings.N_PERMS,
                           seed=0, b_n=None, eps=settings.EPS, stream_key=(), tabulated=False) -> TestReport:
    """ Rejects for large √(nM)·V_n/τ̂_n, τ̂_n² from the local increments Y_i."""
    M = check_window(M, series.n, name='M')
    studentizer = local_variance(local_increments(series, M), b_n, eps)
    statistic = RankStatistic('local_stud', g=M, b_n=studentizer.bandwidth, eps=eps)
    return _permutation_test('local_stud', series, statistic, alpha, side, B, seed, stream_key, tabulated,
                             studentizer, M=M)


def local_unstudentized_test(series: TimeSeries, M: int, alpha=settings.ALPHA, side=settings.SIDE,
                             B=settings.N_PERMS, seed=0, stream_key=(), tabulated=False) -> TestReport:
    M = check_window(M, series.n, name='M')
    statistic = RankStatistic('local_unstud', g=M)
    return _permutation_test('local_unstud', series, statistic, alpha, side, B, seed, stream_key, tabulated, M=M)


def run_method(method: str, series: TimeSeries, alpha=settings.ALPHA, side=settings.SIDE, B=settings.N_PERMS,
               seed=0, M=None, b_n=None, eps=settings.EPS, stream_key=(), tabulated=False) -> TestReport:
    """ Dispatches by method id (underscored or dashed)."""
    method = normalize_method(method)
    if method in LOCAL_METHODS and M is None:
        raise DomainError(f"method {method} needs the local order M")
    if method == 'global_stud':
        return global_studentized_test(series, alpha, side, B, seed, b_n, eps, stream_key, tabulated)
    if method == 'global_unstud':
        return global_unstudentized_test(series, alpha, side, B, seed, stream_key, tabulated)
    if method == 'classical':
        return classical_mk_test(series, alpha, side)
    if method == 'local_stud':
        return local_studentized_test(series, M, alpha, side, B, seed, b_n, eps, stream_key, tabulated)
    return local_unstudentized_test(series, M, alpha, side, B, seed, stream_key, tabulated)


def mk_summary(series: TimeSeries, M: Optional[int] = None):
    """ Raw statistics without a test: U_n and, when M is given, V_n."""
    out = {'U_n': global_mk(series), 'n': series.n, 'pairs': comb(series.n, 2)}
    if M is not None:
        out['V_n'] = local_mk(series, M)
        out['M'] = M
    return out
