"""
Closed-form quantities from the asymptotic theory of the Mann-Kendall tests:
the limiting variance sigma^2, the drift functional nu_n, limiting local power
and the exact finite-n variance of sum(Y_i) under random arrangement.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import ndtr, ndtri

from libs.errors import DomainError
from libs.series import TimeSeries, rank_array

SIGMA_WHITENOISE = 2.0 / 3.0


@dataclass(frozen=True)
class PowerPrediction:
    alpha: float
    h: float
    sigma: float
    power: float
    nu: Optional[float] = None


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_sigma(sigma):
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return float(sigma)


def z_quantile(alpha):
    """ z_{1-alpha}."""
    return float(ndtri(1.0 - _check_alpha(alpha)))


def nu_n(mu: Sequence[float]) -> float:
    """ nu_n = n^(-1/2) Σ_i (n+1-2i)/(n-1) · mu_i."""
    mu = np.asarray(mu, dtype=np.float64)
    n = mu.shape[0]
    if n < 2:
        raise DomainError(f"nu_n needs at least 2 drift values, got {n}")
    weights = (n + 1 - 2 * np.arange(1, n + 1)) / (n - 1)
    return float(weights @ mu / math.sqrt(n))


def nu_n_density_scaled(mu: Sequence[float], density_mean: float) -> float:
    """ 4·E[f(X_1)]·nu_n(mu), the drift functional with the marginal density factor."""
    if not density_mean > 0:
        raise DomainError(f"E[f(X_1)] must be positive, got {density_mean}")
    return 4.0 * density_mean * nu_n(mu)


def gaussian_density_mean(sd: float = 1.0) -> float:
    """ E[f(X)] for X ~ N(0, sd^2): ∫ f^2 = 1/(2·sqrt(pi)·sd)."""
    return 1.0 / (2.0 * math.sqrt(math.pi) * _check_sigma(sd))


def sigma_sq_from_autocov(cov: Sequence[float]) -> float:
    """ sigma^2 = 4/9 + (8/3) Σ_k Cov(V_1, V_{1+k})."""
    cov = np.asarray(cov, dtype=np.float64)
    return 4.0 / 9.0 + 8.0 / 3.0 * float(cov.sum())


def ar1_rank_autocov(rho: float, K: int) -> np.ndarray:
    """ Cov(1-2Φ(X_1), 1-2Φ(X_{1+k})) = (2/pi)·arcsin(rho^k/2), k = 1..K, for unit-variance Gaussian AR(1) margins."""
    if not abs(rho) < 1:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    k = np.arange(1, K + 1, dtype=np.float64)
    return 2.0 / math.pi * np.arcsin(rho ** k / 2.0)


def ar1_sigma_sq(rho: float, K: Optional[int] = None) -> float:
    if K is None:
        # terms decay like |rho|^k; stop once below double precision
        K = 1 if rho == 0 else max(1, int(math.ceil(math.log(1e-17) / math.log(abs(rho)))))
    return sigma_sq_from_autocov(ar1_rank_autocov(rho, K))


def rank_autocov_monte_carlo(series: TimeSeries, K: int) -> np.ndarray:
    """ Sample Cov(V_j, V_{j+k}), k = 1..K, with V_j = 1 - 2·F̂_n(X_j)."""
    if K < 1 or K > series.n - 1:
        raise DomainError(f"K must lie in [1, {series.n - 1}], got {K}")
    v = 1.0 - 2.0 * rank_array(series) / series.n
    mean = v.mean()
    return np.array([np.mean(v[:-k] * v[k:]) - mean * mean for k in range(1, K + 1)])


def limiting_power(nu: float, sigma: float, alpha: float) -> float:
    """ 1 - Φ(z_{1-alpha} + nu/sigma)."""
    return float(ndtr(-(z_quantile(alpha) + nu / _check_sigma(sigma))))


def limiting_power_whitenoise(h: float, alpha: float) -> PowerPrediction:
    """ 1 - Φ(z_{1-alpha} - h/4): drift h·i/n^(3/2) on i.i.d. data, sigma = 2/3."""
    nu = -h / 6.0
    return PowerPrediction(alpha=alpha, h=h, sigma=SIGMA_WHITENOISE,
                           power=limiting_power(nu, SIGMA_WHITENOISE, alpha), nu=nu)


def limiting_power_ar1(h: float, alpha: float, sigma: float) -> PowerPrediction:
    """ 1 - Φ(z_{1-alpha} - h/(6 sigma))."""
    nu = -h / 6.0
    return PowerPrediction(alpha=alpha, h=h, sigma=sigma, power=limiting_power(nu, sigma, alpha), nu=nu)


def limiting_power_density_scaled(h: float, alpha: float, sigma: float, density_mean: float) -> PowerPrediction:
    """ Power with the density-scaled drift functional 4·E[f]·(-h/6)."""
    nu = 4.0 * density_mean * (-h / 6.0)
    return PowerPrediction(alpha=alpha, h=h, sigma=sigma, power=limiting_power(nu, sigma, alpha), nu=nu)


def local_exact_variance(n: int, g: int) -> float:
    """ Var(Σ Y_i) under a uniformly random arrangement: n·g/3 + g(4g^2+3g-1)/18, valid for n >= 2g+1."""
    if g < 1:
        raise DomainError(f"g must be >= 1, got {g}")
    if n < 2 * g + 1:
        raise DomainError(f"local_exact_variance needs n >= 2g+1, got n={n}, g={g}")
    return n * g / 3.0 + g * (4 * g * g + 3 * g - 1) / 18.0


def ma2_local_limit_variance(phi0: float, phi1: float, second_lag: bool = False) -> float:
    """ Limiting variance of sqrt(n)·V_n, order 1, for Gaussian X_i = phi0·e_i + phi1·e_{i-1}.\n
        ✅ 1 + 2r, r = 2(p_1 + p_2) - 1 = (2/pi)·arcsin(rho_D), rho_D = corr(D_i, D_{i+1}), D_i = X_{i+1} - X_i\n
        ✅ second_lag=True adds the lag-2 sign covariance of the increments, which is nonzero when phi0·phi1 != 0\n
        ✅ phi1 = 0 gives 1/3
    """
    v = phi0 * phi0 + phi1 * phi1
    if v == 0:
        raise DomainError("phi0 and phi1 cannot both be zero")
    cross = phi0 * phi1
    var_d = 2.0 * (v - cross)
    r = 2.0 / math.pi * math.asin((2.0 * cross - v) / var_d)
    total = 1.0 + 2.0 * r
    if second_lag:
        total += 4.0 / math.pi * math.asin(-cross / var_d)
    return total


def prediction_table(hs: Sequence[float], alpha: float, rho: Optional[float] = None) -> pd.DataFrame:
    """ Both limiting-power predictions over a drift grid, white-noise base (rho=None) or Gaussian AR(1)."""
    if rho is None:
        sd, sigma = 1.0, SIGMA_WHITENOISE
    else:
        sd, sigma = 1.0 / math.sqrt(1.0 - rho * rho), math.sqrt(ar1_sigma_sq(rho))
    density = gaussian_density_mean(sd)
    rows = []
    for h in hs:
        rows.append({
            'h': h, 'alpha': alpha, 'sigma': sigma,
            'predicted_main': limiting_power_ar1(h, alpha, sigma).power,
            'predicted_density_scaled': limiting_power_density_scaled(h, alpha, sigma, density).power,
        })
    return pd.DataFrame(rows, columns=['h', 'alpha', 'sigma', 'predicted_main', 'predicted_density_scaled'])
