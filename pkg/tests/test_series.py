"""Series core: validation, ranks, and the global/local Mann-Kendall statistics."""

from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from libs.errors import DomainError, TieError
from libs.series import (
    RandomBreak, TimeSeries, ecdf_at_samples, global_mk, local_increments, local_mk, local_pair_sum,
    local_tail_pair_sum, pair_sum_bruteforce, ranks, validate_series,
)

distinct_ints = st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=3, max_size=60, unique=True)


def series_of(values):
    return TimeSeries(np.asarray(values, dtype=np.float64))


class TestValidateSeries:

    def test_tie_free_input_passes(self):
        s = validate_series([1.0, 2.0, 3.0])
        assert s.n == 3

    def test_duplicates_rejected(self):
        with pytest.raises(TieError):
            validate_series([1.0, 1.0, 2.0])

    def test_random_break_is_seeded(self):
        a = ranks(validate_series([1.0, 1.0, 2.0], RandomBreak(7))).ranks.tolist()
        b = ranks(validate_series([1.0, 1.0, 2.0], RandomBreak(7))).ranks.tolist()
        assert a == b
        assert a in ([1, 2, 3], [2, 1, 3])

    @pytest.mark.parametrize('raw', [[1.0], [], [1.0, float('nan')], [0.0, float('inf')]])
    def test_bad_input(self, raw):
        with pytest.raises(DomainError):
            validate_series(raw)

    def test_unknown_policy(self):
        with pytest.raises(DomainError):
            validate_series([1.0, 2.0], 'average')

    def test_values_are_read_only(self):
        s = validate_series([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0


class TestRanks:

    @pytest.mark.parametrize('values, expected', [
        ((3.1, 1.2, 2.5), [3, 1, 2]),
        ((10, 20, 30, 40), [1, 2, 3, 4]),
        ((5, -1, 0, 2), [4, 1, 2, 3]),
    ])
    def test_ranks(self, values, expected):
        assert ranks(series_of(values)).ranks.tolist() == expected

    def test_ecdf(self):
        assert ecdf_at_samples(series_of((3.1, 1.2, 2.5))) == pytest.approx([1, 1 / 3, 2 / 3])
        assert ecdf_at_samples(series_of((-2, 7))) == pytest.approx([0.5, 1.0])


class TestGlobalMK:

    @pytest.mark.parametrize('values, expected', [
        ((1, 2, 3, 4), 1.0),
        ((4, 3, 2, 1), -1.0),
        ((2, 1, 3), 1 / 3),
    ])
    def test_values(self, values, expected):
        assert global_mk(series_of(values)) == pytest.approx(expected)

    @pytest.mark.parametrize('values, expected', [((1, 2, 3), 3), ((3, 2, 1), -3), ((2, 1, 3), 1)])
    def test_bruteforce(self, values, expected):
        assert pair_sum_bruteforce(series_of(values)) == expected

    def test_matches_bruteforce_on_random_series(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(2, 501))
            s = TimeSeries(rng.standard_normal(n))
            assert global_mk(s) == pair_sum_bruteforce(s) / comb(n, 2)

    @given(distinct_ints)
    @settings(max_examples=100, deadline=None)
    def test_antisymmetry_and_reversal(self, values):
        s = series_of(values)
        u = global_mk(s)
        assert global_mk(s.with_values(-s.values)) == -u
        assert global_mk(s.reversed()) == -u

    @given(distinct_ints)
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_monotone_maps(self, values):
        s = series_of(values)
        assert global_mk(s.with_values(np.arctan(s.values / 1e5) * 3 + 7)) == global_mk(s)


class TestLocalMK:

    @pytest.mark.parametrize('values, g, expected', [
        ((1, 3, 2), 1, 0.0),
        ((1, 2, 3, 4), 2, 0.5),
        ((4, 3, 2, 1), 1, -0.75),
    ])
    def test_values(self, values, g, expected):
        assert local_mk(series_of(values), g) == pytest.approx(expected)

    @pytest.mark.parametrize('g', [0, 4, 2.5])
    def test_bad_window(self, g):
        with pytest.raises(DomainError):
            local_mk(series_of((1, 2, 3, 4)), g)

    def test_increments(self):
        assert local_increments(series_of((1, 3, 2)), 2).y.tolist() == [0, 1, 0]
        assert local_increments(series_of((1, 2, 3, 4)), 1).y.tolist() == [0, 1, 1, 1]

    @given(distinct_ints, st.integers(1, 6))
    @settings(max_examples=150, deadline=None)
    def test_increment_sum_identity(self, values, g):
        s = series_of(values)
        g = min(g, s.n - 1)
        total = local_increments(s, g).total()
        assert total == local_pair_sum(s, g) + local_tail_pair_sum(s, g)
        if g == 1:
            assert total == local_pair_sum(s, 1)

    @given(distinct_ints, st.integers(1, 6))
    @settings(max_examples=100, deadline=None)
    def test_antisymmetry_and_reversal(self, values, g):
        s = series_of(values)
        g = min(g, s.n - 1)
        assert local_mk(s.with_values(-s.values), g) == -local_mk(s, g)
        assert local_increments(s.reversed(), g).total() == -local_increments(s, g).total()
        assert local_mk(s.reversed(), 1) == -local_mk(s, 1)

    @given(distinct_ints, st.integers(1, 6))
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_monotone_maps(self, values, g):
        s = series_of(values)
        g = min(g, s.n - 1)
        mapped = s.with_values(np.arctan(s.values / 1e5) * 3 + 7)
        assert local_mk(mapped, g) == local_mk(s, g)
        assert np.array_equal(local_increments(mapped, g).y, local_increments(s, g).y)
