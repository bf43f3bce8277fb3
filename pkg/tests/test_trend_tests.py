import itertools
import math

import numpy as np
import pytest

from libs import permutation
from libs.errors import DomainError
from libs.series import TimeSeries
from libs.trend_tests import (
    classical_mk_test, global_studentized_test, global_unstudentized_test, local_studentized_test,
    local_unstudentized_test, mk_summary, normalize_method, run_method,
)


def arrangements(n):
    for perm in itertools.permutations(range(1, n + 1)):
        yield TimeSeries(np.array(perm, dtype=np.float64))


class TestGlobalTests:

    def test_increasing_series_rejects_at_smallest_p(self):
        report = global_studentized_test(TimeSeries(np.arange(1.0, 1001.0)), alpha=0.05, B=1000, seed=42)
        assert report.reject
        assert report.p == pytest.approx(1 / 1001)
        assert report.studentizer.bandwidth == 10

    def test_decreasing_series_never_rejects_upward(self):
        report = global_unstudentized_test(TimeSeries(np.arange(30.0, 0.0, -1.0)), side='greater', B=500)
        assert not report.reject
        assert report.p == 1.0

    def test_too_short(self):
        with pytest.raises(DomainError):
            global_studentized_test(TimeSeries([1.0, 2.0]))

    def test_bad_alpha(self, iid_series):
        with pytest.raises(DomainError):
            global_unstudentized_test(iid_series, alpha=1.5)

    def test_reproducible(self, iid_series):
        a = global_studentized_test(iid_series, B=300, seed=9, stream_key=(4, 1))
        b = global_studentized_test(iid_series, B=300, seed=9, stream_key=(4, 1))
        assert a == b

    def test_tabulated_null(self, iid_series):
        report = global_studentized_test(iid_series, B=400, seed=1, tabulated=True)
        assert report.details['null_mode'] == 'sampled'
        assert report.B == 400
        assert 0 < report.p <= 1

    def test_reversal_splits_the_exact_null(self):
        series = TimeSeries(np.random.default_rng(8).standard_normal(7))
        forward = global_unstudentized_test(series, B=None)
        backward = global_unstudentized_test(series.reversed(), B=None)
        dist = permutation.tabulate_null(7, None, 'global_unstud', None)
        mass = dist.count_le(forward.statistic, 1e-12) - dist.count_le(forward.statistic, -1e-12)
        assert forward.p + backward.p == pytest.approx(1 + mass / dist.size)


class TestExactLevel:

    @pytest.mark.parametrize('method, M', [
        ('global_stud', None), ('global_unstud', None), ('classical', None), ('local_stud', 2), ('local_unstud', 2),
    ])
    def test_rejection_rate_is_attainable_level(self, method, M):
        alpha = 0.05
        reports = [run_method(method, s, alpha=alpha, B=None, M=M) for s in arrangements(6)]
        kind = 'global_mk' if method == 'classical' else method
        null = permutation.tabulate_null(6, None, kind, None, g=M)
        levels = {permutation.p_value(null, v, 'greater').p for v in null.values}
        attainable = max(level for level in levels if level <= alpha)
        rate = sum(r.reject for r in reports) / len(reports)
        assert rate == pytest.approx(attainable, abs=1e-12)
        assert rate <= alpha


class TestMonotoneInvariance:

    @pytest.mark.parametrize('method, M', [
        ('global_stud', None), ('global_unstud', None), ('classical', None), ('local_stud', 3), ('local_unstud', 3),
    ])
    def test_same_decision_after_increasing_map(self, iid_series, method, M):
        mapped = iid_series.with_values(np.exp(iid_series.values))
        a = run_method(method, iid_series, B=300, seed=5, M=M)
        b = run_method(method, mapped, B=300, seed=5, M=M)
        assert b.statistic == a.statistic
        assert b.p == a.p
        assert b.reject == a.reject
        assert b.studentizer == a.studentizer


class TestClassical:

    def test_exact_small_n(self):
        report = classical_mk_test(TimeSeries([1.0, 2.0, 3.0]))
        assert report.details['null_mode'] == 'exact'
        assert report.p == pytest.approx(1 / 6)
        assert not report.reject

    def test_normal_approximation(self):
        report = classical_mk_test(TimeSeries(np.arange(1.0, 21.0)))
        assert report.details['S'] == 190
        assert report.details['z'] == pytest.approx(190 / math.sqrt(950))
        assert report.reject
        assert report.studentizer is None

    def test_two_sided(self):
        report = classical_mk_test(TimeSeries(np.arange(20.0, 0.0, -1.0)), side='two_sided')
        assert report.reject
        assert report.p < 1e-8


class TestLocalTests:

    def test_increasing_series(self):
        report = local_studentized_test(TimeSeries(np.arange(1.0, 1001.0)), M=5, B=999, seed=3)
        assert report.reject
        assert report.p == pytest.approx(1 / 1000)
        assert report.M == 5

    def test_unstudentized_increasing(self, increasing_series):
        report = local_unstudentized_test(increasing_series, M=5, B=999, seed=3)
        assert report.p == pytest.approx(1 / 1000)

    @pytest.mark.parametrize('M', [0, 100])
    def test_bad_order(self, increasing_series, M):
        with pytest.raises(DomainError):
            local_studentized_test(increasing_series, M=M)


class TestRunMethod:

    def test_dashed_names(self):
        assert normalize_method('global-stud') == 'global_stud'

    def test_unknown(self, iid_series):
        with pytest.raises(DomainError):
            run_method('spearman', iid_series)

    def test_local_needs_order(self, iid_series):
        with pytest.raises(DomainError):
            run_method('local_stud', iid_series)

    def test_report_lines(self, iid_series):
        report = run_method('global-stud', iid_series, B=200, seed=42)
        lines = report.to_lines()
        assert lines[0] == 'method=global_stud'
        assert f"reject={str(report.reject).lower()}" in lines
        record = report.to_dict()
        assert record['studentizer_bandwidth'] == 3
        assert record['null_mode'] == 'sampled'
        assert 'M' not in dict(line.split('=', 1) for line in lines)


def test_mk_summary():
    out = mk_summary(TimeSeries([1.0, 2.0, 3.0, 4.0]), M=2)
    assert out['U_n'] == 1.0
    assert out['V_n'] == 0.5
    assert out['pairs'] == 6
