"""
Studentizers for the Mann-Kendall statistics.

global_variance: σ̂_n² = 4/9 + (8/(3n)) Σ_{k≤b_n} Σ_j V̂_j V̂_{j+k}, V̂_j = 1 - 2 F̂_n(X_j)
local_variance:  τ̂_n² = σ̂_n²(Y) / G, σ̂_n²(Y) the truncated autocovariance sum of the Y_i

Both estimates are floored at eps (1e-3 by default).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import settings
from libs import kernels
from libs.errors import DomainError
from libs.series import LocalIncrements, TimeSeries, rank_array


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    raw_value: float
    bandwidth: int
    floored: bool
    eps: float


def bandwidth_default(n: int) -> int:
    """ b_n = [n^(1/3)], clamped to [1, n-1]."""
    if n < 2:
        raise DomainError(f"bandwidth needs n >= 2, got {n}")
    b = int(round(n ** (1.0 / 3.0)))
    # integer cube root: round() can overshoot for non-cubes
    while b ** 3 > n:
        b -= 1
    while (b + 1) ** 3 <= n:
        b += 1
    return min(max(b, 1), n - 1)


def _check_bandwidth(b_n, n):
    if b_n is None:
        return bandwidth_default(n)
    if int(b_n) != b_n or b_n < 1 or b_n > n - 1:
        raise DomainError(f"bandwidth must be an integer in [1, {n - 1}], got {b_n}")
    return int(b_n)


def _check_eps(eps):
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return float(eps)


def _estimate(raw, b_n, eps):
    return VarianceEstimate(value=max(raw, eps), raw_value=raw, bandwidth=b_n, floored=raw < eps, eps=eps)


def global_variance_from_ranks(r: np.ndarray, b_n: Optional[int] = None, eps: float = settings.EPS) -> VarianceEstimate:
    r = np.ascontiguousarray(r, dtype=np.int64)
    b_n = _check_bandwidth(b_n, r.shape[0])
    eps = _check_eps(eps)
    return _estimate(float(kernels.global_variance_raw(r, b_n)), b_n, eps)


def global_variance(series: TimeSeries, b_n: Optional[int] = None, eps: float = settings.EPS) -> VarianceEstimate:
    return global_variance_from_ranks(rank_array(series), b_n, eps)


def local_variance(y: LocalIncrements, b_n: Optional[int] = None, eps: float = settings.EPS) -> VarianceEstimate:
    """ τ̂_n² = max(σ̂_n²/G, eps); the estimate carries τ̂², not σ̂²."""
    b_n = _check_bandwidth(b_n, y.n)
    eps = _check_eps(eps)
    sigma_sq = float(kernels.local_variance_raw(np.ascontiguousarray(y.y, dtype=np.int64), b_n))
    return _estimate(sigma_sq / y.G, b_n, eps)


def studentize_global(u: float, var: VarianceEstimate, n: int) -> float:
    return math.sqrt(n) * u / math.sqrt(var.value)


def studentize_local(v: float, var: VarianceEstimate, n: int, G: int) -> float:
    return math.sqrt(n * G) * v / math.sqrt(var.value)
