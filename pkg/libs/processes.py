"""
Seeded data-generating processes.

Every generator takes a seed (int) or a numpy Generator and returns a
TimeSeries. Stationary generators start exactly from their stationary law;
there is no burn-in.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import signal

from libs.errors import DomainError
from libs.seeding import get_rng
from libs.series import TimeSeries

DISTRIBUTIONS = ('gaussian', 'uniform', 'student_t')


def innovations(rng, size, dist='gaussian', df=None):
    """ Unit-variance centred innovations.\n
        ✅ gaussian: standard normal\n
        ✅ uniform: U(-√3, √3)\n
        ✅ student_t: t(df)·sqrt((df-2)/df), df > 2
    """
    if dist == 'gaussian':
        return rng.standard_normal(size)
    if dist == 'uniform':
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
    if dist == 'student_t':
        if df is None or not df > 2:
            raise DomainError(f"student_t innovations need df > 2, got {df}")
        return rng.standard_t(df, size) * math.sqrt((df - 2.0) / df)
    raise DomainError(f"unknown innovation distribution {dist!r}; expected one of {DISTRIBUTIONS}")


def _check_n(n):
    if int(n) != n or n < 2:
        raise DomainError(f"series length must be an integer >= 2, got {n}")
    return int(n)


def _check_rho(rho):
    if not abs(rho) < 1:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    return float(rho)


def _check_epsilon(epsilon, allow_zero=False):
    low_ok = epsilon >= 0 if allow_zero else epsilon > 0
    if not (low_ok and epsilon < 1):
        bounds = '[0, 1)' if allow_zero else '(0, 1)'
        raise DomainError(f"epsilon must lie in {bounds}, got {epsilon}")
    return float(epsilon)


def _tie_seed(rng):
    return int(rng.integers(0, 2 ** 63 - 1))


def gen_iid(n, dist='gaussian', seed=None, df=None) -> TimeSeries:
    n = _check_n(n)
    rng = get_rng(seed)
    return TimeSeries(innovations(rng, n, dist, df))


def gen_mdep_product(n, m, seed=None) -> TimeSeries:
    """ X_i = Z_i·Z_{i+1}·...·Z_{i+m}: m+1 Gaussian factors, so the sequence is m-dependent and m=0 is i.i.d."""
    n = _check_n(n)
    if int(m) != m or m < 0:
        raise DomainError(f"m must be an integer >= 0, got {m}")
    m = int(m)
    z = get_rng(seed).standard_normal(n + m)
    x = z[:n].copy()
    for j in range(1, m + 1):
        x *= z[j:j + n]
    return TimeSeries(x)


def _ar1_path(rng, n, rho, dist='gaussian', df=None):
    e = innovations(rng, n, dist, df)
    # X_1 ~ N(0, 1/(1-rho^2)); for non-Gaussian innovations only the first two moments match
    e[0] = e[0] / math.sqrt(1.0 - rho * rho)
    return signal.lfilter([1.0], [1.0, -rho], e)


def gen_ar1(n, rho, seed=None, dist='gaussian', df=None) -> TimeSeries:
    """ Stationary AR(1): X_1 ~ N(0, 1/(1-rho^2)), X_i = rho·X_{i-1} + e_i."""
    n = _check_n(n)
    rho = _check_rho(rho)
    return TimeSeries(_ar1_path(get_rng(seed), n, rho, dist, df))


def gen_ar2_interleaved(n, rho, seed=None) -> TimeSeries:
    """ Two independent stationary AR(1) streams at odd and even positions: X_i = rho·X_{i-2} + eta_i."""
    n = _check_n(n)
    rho = _check_rho(rho)
    rng = get_rng(seed)
    n_odd = (n + 1) // 2
    n_even = n // 2
    x = np.empty(n, dtype=np.float64)
    x[0::2] = _ar1_path(rng, n_odd, rho)
    x[1::2] = _ar1_path(rng, n_even, rho)
    return TimeSeries(x)


def gen_ma2(n, phi0, phi1, seed=None, dist='gaussian', df=None) -> TimeSeries:
    """ X_i = phi0·e_i + phi1·e_{i-1} (1-dependent)."""
    n = _check_n(n)
    if phi0 == 0 and phi1 == 0:
        raise DomainError("phi0 and phi1 cannot both be zero")
    e = innovations(get_rng(seed), n + 1, dist, df)
    return TimeSeries(phi0 * e[1:] + phi1 * e[:-1])


def markov_local_stationary_law(M, epsilon, initial='stationary'):
    """ Law on the states -M..M (index k holds state k - M).\n
        ✅ 'stationary': pi_{-M} = eps, pi_k = eps(1-eps)^(k+M) for k < M, pi_M = (1-eps)^(2M)\n
        ✅ 'displayed': pi_{-M} = eps/(1-(1-eps)^(2M+1)), pi_k = pi_{-M}(1-eps)^(k+M)
    """
    if int(M) != M or M < 1:
        raise DomainError(f"M must be an integer >= 1, got {M}")
    M = int(M)
    epsilon = _check_epsilon(epsilon)
    steps = np.arange(2 * M + 1, dtype=np.float64)
    if initial == 'stationary':
        law = epsilon * (1.0 - epsilon) ** steps
        law[-1] = (1.0 - epsilon) ** (2 * M)
    elif initial == 'displayed':
        law = epsilon / (1.0 - (1.0 - epsilon) ** (2 * M + 1)) * (1.0 - epsilon) ** steps
    else:
        raise DomainError(f"initial must be 'stationary' or 'displayed', got {initial!r}")
    return law


def markov_local_states(n, M, epsilon, seed=None, initial='stationary'):
    """ Integer path of the reset chain on -M..M.\n
        ✅ from i < M: i+1 w.p. 1-eps, -M w.p. eps\n
        ✅ from M: stays w.p. 1-eps, -M w.p. eps
    """
    n = _check_n(n)
    law = markov_local_stationary_law(M, epsilon, initial)
    rng = get_rng(seed)
    start = int(rng.choice(law.shape[0], p=law)) - M
    resets = rng.random(n) < epsilon
    resets[0] = False
    t = np.arange(n)
    last_reset = np.maximum.accumulate(np.where(resets, t, -1))
    climbed = np.where(last_reset < 0, start + t, -M + (t - last_reset))
    return np.minimum(climbed, M).astype(np.int64)


def gen_markov_local(n, M, epsilon, seed=None, jitter=True, initial='stationary') -> TimeSeries:
    """ Markov chain with local monotone trend.\n
        ✅ jitter=True: adds U(-0.25, 0.25), keeping every strict inequality between states\n
        ✅ jitter=False: raw integer path, ties broken at ranking time by a seeded shuffle
    """
    rng = get_rng(seed)
    states = markov_local_states(n, M, epsilon, rng, initial)
    if jitter:
        return TimeSeries(states + rng.uniform(-0.25, 0.25, states.shape[0]))
    return TimeSeries(states.astype(np.float64), tie_break_seed=_tie_seed(rng))


def gen_drift_walk(n, c, epsilon, seed=None) -> TimeSeries:
    """ Y_i = X_1 + ... + X_i with X = 1 w.p. 1-eps and -c w.p. eps (nonstationary, Y_0 = 0)."""
    n = _check_n(n)
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    epsilon = _check_epsilon(epsilon, allow_zero=True)
    rng = get_rng(seed)
    steps = np.where(rng.random(n) < epsilon, -float(c), 1.0)
    return TimeSeries(np.cumsum(steps), tie_break_seed=_tie_seed(rng))


def linear_drift(n, h):
    """ mu_{n,i} = h·i / n^(3/2), i = 1..n."""
    return h * np.arange(1, n + 1, dtype=np.float64) / n ** 1.5


def add_linear_drift(series, h) -> TimeSeries:
    if not np.isfinite(h):
        raise DomainError(f"drift h must be finite, got {h}")
    if isinstance(series, TimeSeries):
        return series.with_values(series.values + linear_drift(series.n, h))
    values = np.asarray(series, dtype=np.float64)
    return TimeSeries(values + linear_drift(values.shape[0], h))


GENERATORS = {
    'iid': gen_iid,
    'mdep_product': gen_mdep_product,
    'ar1': gen_ar1,
    'ar2_interleaved': gen_ar2_interleaved,
    'ma2': gen_ma2,
    'markov_local': gen_markov_local,
    'drift_walk': gen_drift_walk,
}

# parameters each kind accepts (beyond n and seed)
PARAMETERS = {
    'iid': ('dist', 'df'),
    'mdep_product': ('m',),
    'ar1': ('rho', 'dist', 'df'),
    'ar2_interleaved': ('rho',),
    'ma2': ('phi0', 'phi1', 'dist', 'df'),
    'markov_local': ('M', 'epsilon'),
    'drift_walk': ('c', 'epsilon'),
}

REQUIRED = {
    'mdep_product': ('m',),
    'ar1': ('rho',),
    'ar2_interleaved': ('rho',),
    'ma2': ('phi0', 'phi1'),
    'markov_local': ('M', 'epsilon'),
    'drift_walk': ('c', 'epsilon'),
}


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    n: int
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)
    drift: float = 0.0

    def __post_init__(self):
        if self.kind not in GENERATORS:
            raise DomainError(f"unknown process {self.kind!r}; expected one of {', '.join(GENERATORS)}")
        _check_n(self.n)
        unknown = set(self.params) - set(PARAMETERS[self.kind])
        if unknown:
            raise DomainError(f"process {self.kind} does not take {', '.join(sorted(unknown))}")
        missing = [p for p in REQUIRED.get(self.kind, ()) if p not in self.params]
        if missing:
            raise DomainError(f"process {self.kind} needs {', '.join(missing)}")
        if self.kind in ('ar1', 'ar2_interleaved'):
            _check_rho(self.params['rho'])
        if self.kind == 'markov_local':
            markov_local_stationary_law(self.params['M'], self.params['epsilon'])

    def label(self):
        """ 'rho=0.6' style parameter label (drift appended when nonzero)."""
        parts = [f"{k}={v}" for k, v in self.params.items()]
        if self.drift:
            parts.append(f"h={self.drift}")
        return ';'.join(parts)


def with_drift(spec: ProcessSpec, h: float) -> ProcessSpec:
    return replace(spec, drift=float(h))


def simulate(spec: ProcessSpec, seed=None) -> TimeSeries:
    """ Draws one path of spec; seed (int or Generator) overrides spec.seed."""
    rng = get_rng(spec.seed if seed is None else seed)
    series = GENERATORS[spec.kind](spec.n, seed=rng, **spec.params)
    if spec.drift:
        series = add_linear_drift(series, spec.drift)
    return series
