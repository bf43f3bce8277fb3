"""
Monte Carlo harness: declarative experiment configs, the (cell, replicate)
task grid, and the rejection-rate / power tables.

Seeding: replicate r of cell c draws its series from stream(master_seed, c, r);
method k of that replicate permutes with key (master_seed, c, r, k). Every
method sees the same series, and results do not depend on the worker count.
"""

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from config import settings
from libs import power
from libs.errors import ConfigError, DomainError
from libs.processes import PARAMETERS, ProcessSpec, linear_drift, simulate
from libs.seeding import stream
from libs.trend_tests import LOCAL_METHODS, normalize_method, run_method

logger = logging.getLogger('trendperm.experiment')

RESULT_COLUMNS = ['process', 'param', 'n', 'method', 'alpha', 'n_sims', 'n_perms', 'reject_rate', 'mc_se', 'seed',
                  'wall_time_s']
POWER_COLUMNS = ['process', 'param', 'n', 'h', 'method', 'alpha', 'n_sims', 'n_perms', 'power', 'mc_se',
                 'predicted_main', 'predicted_density_scaled', 'seed', 'wall_time_s']
# config key -> process parameter (the chain's M is chain_M, M is the local test order)
SWEEP_KEYS = {'m': 'm', 'rho': 'rho', 'phi0': 'phi0', 'phi1': 'phi1', 'dist': 'dist', 'df': 'df',
              'chain_M': 'M', 'epsilon': 'epsilon', 'c': 'c'}
POWER_TOLERANCE = 0.05


@dataclass
class ExperimentConfig:
    process: str
    n: List[int]
    methods: List[str]
    sweeps: dict = field(default_factory=dict)  # config key -> list of values
    h: List[float] = field(default_factory=lambda: [0.0])
    M: Optional[int] = None
    alpha: float = settings.ALPHA
    side: str = settings.SIDE
    n_sims: int = 1000
    n_perms: int = settings.N_PERMS
    master_seed: int = 0
    workers: Optional[int] = None
    b_n: Optional[int] = None
    eps: float = settings.EPS

    def __post_init__(self):
        if self.process not in PARAMETERS:
            raise ConfigError(f"unknown process {self.process!r}", key='process')
        if not self.n:
            raise ConfigError("at least one n is required", key='n')
        if not self.methods:
            raise ConfigError("at least one method is required", key='methods')
        try:
            self.methods = [normalize_method(m) for m in self.methods]
        except DomainError as e:
            raise ConfigError(str(e), key='methods')
        for key in self.sweeps:
            if key not in SWEEP_KEYS:
                raise ConfigError(f"unknown sweep key {key!r}", key=key)
            if SWEEP_KEYS[key] not in PARAMETERS[self.process]:
                raise ConfigError(f"process {self.process} does not take {key}", key=key)
        if any(m in LOCAL_METHODS for m in self.methods) and self.M is None:
            raise ConfigError("local methods need the test order M", key='M')
        if self.n_sims < 1:
            raise ConfigError(f"n_sims must be >= 1, got {self.n_sims}", key='n_sims')
        if self.n_perms < 1:
            raise ConfigError(f"n_perms must be >= 1, got {self.n_perms}", key='n_perms')
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}", key='alpha')
        if self.side not in ('greater', 'less', 'two_sided'):
            raise ConfigError(f"unknown side {self.side!r}", key='side')
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}", key='workers')
        # every cell must build
        try:
            cells(self)
        except DomainError as e:
            raise ConfigError(str(e))


@dataclass(frozen=True)
class Cell:
    index: int
    spec: ProcessSpec
    param: str


def cells(config: ExperimentConfig) -> List[Cell]:
    """ Grid cells in row order: parameter sweeps (config key order), then h, then n."""
    keys = list(config.sweeps)
    out = []
    for combo in itertools.product(*(config.sweeps[k] for k in keys)):
        params = {SWEEP_KEYS[k]: v for k, v in zip(keys, combo)}
        label = ';'.join(f"{k}={v}" for k, v in zip(keys, combo))
        for h in config.h:
            param = label if not h else ';'.join(filter(None, [label, f"h={h}"]))
            for n in config.n:
                spec = ProcessSpec(config.process, int(n), params=params, drift=float(h))
                out.append(Cell(index=len(out), spec=spec, param=param))
    return out


@dataclass
class ResultTable:
    frame: pd.DataFrame

    def __len__(self):
        return len(self.frame)

    def row(self, param, n, method):
        f = self.frame
        match = f[(f['param'] == param) & (f['n'] == n) & (f['method'] == method)]
        if len(match) != 1:
            raise KeyError((param, n, method))
        return match.iloc[0]

    def without_timing(self):
        return self.frame.drop(columns=['wall_time_s'])


def _run_task(task):
    """ One replicate of one cell; returns (cell, replicate, decisions, seconds per method, floored, error)."""
    config, cell, r = task
    decisions, seconds = [], []
    floored = 0
    try:
        series = simulate(cell.spec, stream(config.master_seed, cell.index, r))
        for k, method in enumerate(config.methods):
            start = time.perf_counter()
            report = run_method(method, series, alpha=config.alpha, side=config.side, B=config.n_perms,
                                seed=config.master_seed, M=config.M, b_n=config.b_n, eps=config.eps,
                                stream_key=(cell.index, r, k))
            seconds.append(time.perf_counter() - start)
            decisions.append(bool(report.reject))
            floored += bool(report.studentizer is not None and report.studentizer.floored)
    except Exception as e:
        return cell.index, r, None, None, 0, f"{type(e).__name__}: {e}"
    return cell.index, r, decisions, seconds, floored, None


def _map_tasks(tasks, workers):
    if workers == 1:
        return [_run_task(t) for t in tasks]
    chunksize = max(1, len(tasks) // (workers * 16))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=chunksize))


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ResultTable:
    """ Rejection rates for every (cell, method).\n
        ✅ workers: explicit value > TRENDPERM_WORKERS > config.workers > 1\n
        ✅ a cell with any failed replicate is reported with NaN rates
    """
    workers = settings.resolve_workers(workers, config.workers)
    grid = cells(config)
    tasks = [(config, cell, r) for cell in grid for r in range(config.n_sims)]
    logger.info(f"run_experiment() > {len(grid)} cells x {config.n_sims} sims on {workers} worker(s)")
    results = sorted(_map_tasks(tasks, workers), key=lambda t: (t[0], t[1]))

    n_methods = len(config.methods)
    rejects = np.zeros((len(grid), n_methods), dtype=np.int64)
    seconds = np.zeros((len(grid), n_methods), dtype=np.float64)
    floors = np.zeros(len(grid), dtype=np.int64)
    failed = {}
    for cell_index, r, decisions, secs, floored, error in results:
        if error is not None:
            failed.setdefault(cell_index, error)
            continue
        rejects[cell_index] += np.asarray(decisions, dtype=np.int64)
        seconds[cell_index] += secs
        floors[cell_index] += floored
    for cell_index, error in failed.items():
        cell = grid[cell_index]
        logger.warning(f"run_experiment() > cell {cell_index} ({cell.spec.kind} {cell.param} n={cell.spec.n}) failed: {error}")
    for cell in grid:
        if floors[cell.index]:
            logger.debug(f"run_experiment() > cell {cell.index} ({cell.param} n={cell.spec.n}): variance floor hit {floors[cell.index]} time(s)")

    rows = []
    for cell in grid:
        for k, method in enumerate(config.methods):
            if cell.index in failed:
                rate = se = float('nan')
            else:
                rate = rejects[cell.index, k] / config.n_sims
                se = math.sqrt(rate * (1.0 - rate) / config.n_sims)
            rows.append({
                'process': cell.spec.kind, 'param': cell.param, 'n': cell.spec.n, 'method': method,
                'alpha': config.alpha, 'n_sims': config.n_sims, 'n_perms': config.n_perms,
                'reject_rate': rate, 'mc_se': se, 'seed': config.master_seed,
                'wall_time_s': round(float(seconds[cell.index, k]), 3),
            })
    return ResultTable(pd.DataFrame(rows, columns=RESULT_COLUMNS))


def _marginal_sd_and_sigma(spec: ProcessSpec):
    """ Marginal s.d. and limiting sigma of the base process, or None when there is no closed form."""
    if spec.kind == 'iid' and spec.params.get('dist', 'gaussian') == 'gaussian':
        return 1.0, power.SIGMA_WHITENOISE
    if spec.kind == 'ar1' and spec.params.get('dist', 'gaussian') == 'gaussian':
        rho = spec.params['rho']
        return 1.0 / math.sqrt(1.0 - rho * rho), math.sqrt(power.ar1_sigma_sq(rho))
    return None


@dataclass
class PowerStudy:
    frame: pd.DataFrame
    matches: dict  # prediction column -> max |empirical - predicted|


def run_power_study(config: ExperimentConfig, workers: Optional[int] = None) -> PowerStudy:
    """ Empirical power over the drift sweep next to both limiting-power predictions.\n
        ✅ predicted_main: 1 - Φ(z + nu_n/sigma)\n
        ✅ predicted_density_scaled: same with nu_n scaled by 4·E[f(X_1)]
    """
    table = run_experiment(config, workers)
    grid = cells(config)
    rows = []
    for cell in grid:
        base = _marginal_sd_and_sigma(cell.spec)
        mu = linear_drift(cell.spec.n, cell.spec.drift)
        if base is None:
            main = scaled = float('nan')
        else:
            sd, sigma = base
            main = power.limiting_power(power.nu_n(mu), sigma, config.alpha)
            scaled = power.limiting_power(power.nu_n_density_scaled(mu, power.gaussian_density_mean(sd)), sigma,
                                          config.alpha)
        for method in config.methods:
            found = table.frame[(table.frame['param'] == cell.param) & (table.frame['n'] == cell.spec.n)
                                & (table.frame['method'] == method)].iloc[0]
            rows.append({
                'process': cell.spec.kind, 'param': cell.param, 'n': cell.spec.n, 'h': cell.spec.drift,
                'method': method, 'alpha': config.alpha, 'n_sims': config.n_sims, 'n_perms': config.n_perms,
                'power': found['reject_rate'], 'mc_se': found['mc_se'],
                'predicted_main': main, 'predicted_density_scaled': scaled,
                'seed': config.master_seed, 'wall_time_s': found['wall_time_s'],
            })
    frame = pd.DataFrame(rows, columns=POWER_COLUMNS)
    matches = {}
    for column in ('predicted_main', 'predicted_density_scaled'):
        gap = (frame['power'] - frame[column]).abs().max()
        matches[column] = float(gap)
        verdict = 'matches' if gap <= POWER_TOLERANCE else 'does not match'
        logger.info(f"run_power_study() > {column} {verdict} the empirical power (max gap {gap:.4f})")
    return PowerStudy(frame=frame, matches=matches)
