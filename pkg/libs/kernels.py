"""
Compiled rank kernels.

Every statistic in trendperm is a function of the rank vector alone, so the
hot loops here take int64 arrays of 1-based ranks (a permutation of 1..n) and
accumulate pair counts in exact integer arithmetic. The batch variants walk a
(B, n) matrix of permuted rank vectors and are what makes 10^6 permuted
evaluations per experiment cell affordable.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def count_inversions(ranks):
    """Number of pairs i < j with ranks[i] > ranks[j], bottom-up merge sort."""
    n = ranks.shape[0]
    src = ranks.copy()
    dst = np.empty_like(src)
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if src[i] <= src[j]:
                    dst[k] = src[i]
                    i += 1
                else:
                    dst[k] = src[j]
                    j += 1
                    inversions += mid - i
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
        src, dst = dst, src
        width *= 2
    return inversions


@njit(cache=True)
def global_pair_sum(ranks):
    """S = sum_{i<j} sign(r_j - r_i) for a permutation: C(n,2) - 2 * inversions."""
    n = ranks.shape[0]
    return n * (n - 1) // 2 - 2 * count_inversions(ranks)


@njit(cache=True)
def local_pair_sum(ranks, g):
    """Sum of sign(r_j - r_i) over i <= n-g, i < j <= i+g (0-based: i < n-g)."""
    n = ranks.shape[0]
    total = 0
    for i in range(n - g):
        ri = ranks[i]
        for j in range(i + 1, i + g + 1):
            if ranks[j] > ri:
                total += 1
            elif ranks[j] < ri:
                total -= 1
    return total


@njit(cache=True)
def local_increments(ranks, g):
    """Y_i = sum over the (at most g) predecessors j of sign(r_i - r_j)."""
    n = ranks.shape[0]
    y = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        lo = i - g
        if lo < 0:
            lo = 0
        acc = 0
        ri = ranks[i]
        for j in range(lo, i):
            if ri > ranks[j]:
                acc += 1
            elif ri < ranks[j]:
                acc -= 1
        y[i] = acc
    return y


# int64 partial sums of at most this many n^2-sized products stay below 2^63 for n < 9e7
CROSS_FLUSH = 1024


@njit(cache=True)
def global_cross_sum(ranks, b):
    """T = sum_{k=1..b} sum_j (n - 2 r_j)(n - 2 r_{j+k}), i.e. n^2 times the V-hat cross sum.

    Products are exact in int64 and flushed into a float total every CROSS_FLUSH terms;
    one int64 total would wrap once b*n^3 passes 2^63 (n around 7e5).
    """
    n = ranks.shape[0]
    total = 0.0
    for k in range(1, b + 1):
        acc = 0
        for j in range(n - k):
            acc += (n - 2 * ranks[j]) * (n - 2 * ranks[j + k])
            if (j + 1) % CROSS_FLUSH == 0:
                total += float(acc)
                acc = 0
        total += float(acc)
    return total


@njit(cache=True)
def global_variance_raw(ranks, b):
    n = ranks.shape[0]
    nf = float(n)
    return 4.0 / 9.0 + 8.0 * global_cross_sum(ranks, b) / (3.0 * nf * nf * nf)


@njit(cache=True)
def local_variance_raw(y, b):
    """Truncated autocovariance sum of the Y_i up to lag b (no kernel weights)."""
    n = y.shape[0]
    mean = 0.0
    for i in range(n):
        mean += y[i]
    mean /= n
    lag0 = 0.0
    for i in range(n):
        d = y[i] - mean
        lag0 += d * d
    cross = 0.0
    for j in range(1, b + 1):
        for i in range(n - j):
            cross += (y[i] - mean) * (y[i + j] - mean)
    return lag0 / n + 2.0 * cross / n


@njit(cache=True)
def floor_at(value, eps):
    if value < eps:
        return eps
    return value


# STATISTIC CODES (keys of libs.permutation.STATISTIC_CODES)
GLOBAL_MK = 0
GLOBAL_UNSTUD = 1
GLOBAL_STUD = 2
LOCAL_MK = 3
LOCAL_UNSTUD = 4
LOCAL_STUD = 5
LOCAL_SUM = 6


@njit(cache=True)
def evaluate(code, ranks, g, b, eps):
    """One statistic on one rank vector. Single code path for observed and permuted values."""
    n = ranks.shape[0]
    nf = float(n)
    if code == GLOBAL_MK or code == GLOBAL_UNSTUD or code == GLOBAL_STUD:
        u = float(global_pair_sum(ranks)) / float(n * (n - 1) // 2)
        if code == GLOBAL_MK:
            return u
        if code == GLOBAL_UNSTUD:
            return np.sqrt(nf) * u
        var = floor_at(global_variance_raw(ranks, b), eps)
        return np.sqrt(nf) * u / np.sqrt(var)
    if code == LOCAL_SUM:
        y = local_increments(ranks, g)
        return float(y.sum())
    v = float(local_pair_sum(ranks, g)) / (nf * g)
    if code == LOCAL_MK:
        return v
    if code == LOCAL_UNSTUD:
        return np.sqrt(nf * g) * v
    y = local_increments(ranks, g)
    tau_sq = floor_at(local_variance_raw(y, b) / g, eps)
    return np.sqrt(nf * g) * v / np.sqrt(tau_sq)


@njit(cache=True)
def evaluate_batch(code, rank_matrix, g, b, eps):
    rows = rank_matrix.shape[0]
    out = np.empty(rows, dtype=np.float64)
    for r in range(rows):
        out[r] = evaluate(code, rank_matrix[r], g, b, eps)
    return out


@njit(cache=True)
def permute_rows(ranks, perms):
    """Row r of the result is ranks[perms[r]] (perms holds 0-based indices)."""
    rows, n = perms.shape
    out = np.empty((rows, n), dtype=np.int64)
    for r in range(rows):
        for i in range(n):
            out[r, i] = ranks[perms[r, i]]
    return out
