"""
File formats: series (text / single-column CSV), experiment configs
(line-oriented key=value), result and power tables (CSV) and test reports.
"""

import io
import json
import os

import pandas as pd

from libs.errors import ConfigError, TrendPermError
from libs.experiment import POWER_COLUMNS, RESULT_COLUMNS, SWEEP_KEYS, ExperimentConfig, ResultTable
from libs.series import TiePolicy, validate_series

# SERIES FILES
SERIES_HEADER = 'value'


def _parse_float(text, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}", line=line)


def parse_series(text: str, csv: bool = False, tie_policy: TiePolicy = 'reject', source: str = 'series'):
    """ Parses series text.\n
        ✅ csv=True: one column with a header line\n
        ✅ otherwise: one value per line, blank lines and '#' comments skipped
    """
    if csv:
        df = pd.read_csv(io.StringIO(text), float_precision='round_trip')
        if df.shape[1] != 1:
            raise ConfigError(f"{source}: expected a single-column CSV, found {df.shape[1]} columns")
        try:
            values = pd.to_numeric(df.iloc[:, 0], errors='raise').to_numpy(dtype='float64')
        except (ValueError, TypeError) as e:
            raise ConfigError(f"{source}: non-numeric value in column {df.columns[0]!r}: {e}")
        return validate_series(values, tie_policy)
    values = []
    for number, raw in enumerate(text.splitlines(), start=1):
        item = raw.split('#', 1)[0].strip()
        if item:
            values.append(_parse_float(item, number))
    return validate_series(values, tie_policy)


def read_series(path, tie_policy: TiePolicy = 'reject'):
    with open(path, 'r', encoding='utf-8') as fh:
        text = fh.read()
    return parse_series(text, str(path).lower().endswith('.csv'), tie_policy, source=str(path))


def format_series(series, csv: bool = False) -> str:
    """ One value per line with repr(), which round-trips every float exactly."""
    lines = [repr(float(v)) for v in series.values]
    if csv:
        lines = [SERIES_HEADER] + lines
    return '\n'.join(lines) + '\n'


def write_series(series, path):
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(format_series(series, str(path).lower().endswith('.csv')))


# EXPERIMENT CONFIGS
INT_KEYS = {'n', 'm', 'chain_M', 'M', 'n_sims', 'n_perms', 'master_seed', 'workers', 'b_n'}
FLOAT_KEYS = {'rho', 'phi0', 'phi1', 'df', 'epsilon', 'c', 'h', 'alpha', 'eps'}
LIST_KEYS = {'n', 'h', 'methods'} | set(SWEEP_KEYS)
SCALAR_KEYS = {'process', 'M', 'alpha', 'side', 'n_sims', 'n_perms', 'master_seed', 'workers', 'b_n', 'eps'}
# written after 'process' and the sweep keys
CONFIG_ORDER = ['n', 'h', 'methods', 'M', 'alpha', 'side', 'n_sims', 'n_perms', 'master_seed', 'workers', 'b_n', 'eps']


def _convert(key, text, line):
    if key in INT_KEYS:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {text!r}", line=line, key=key)
    if key in FLOAT_KEYS:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key} expects a number, got {text!r}", line=line, key=key)
    return text


def parse_config(text: str) -> ExperimentConfig:
    """ key = value lines; '#' starts a comment; 'key = a, b, c' or a repeated key builds a sweep list."""
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"expected key = value, got {line!r}", line=number)
        key, _, value = (part.strip() for part in line.partition('='))
        if key not in LIST_KEYS and key not in SCALAR_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=number, key=key)
        items = [item.strip() for item in value.split(',')]
        if not value or any(not item for item in items):
            raise ConfigError(f"empty value for {key}", line=number, key=key)
        converted = [_convert(key, item, number) for item in items]
        if key in SCALAR_KEYS:
            if key in values or len(converted) != 1:
                raise ConfigError(f"{key} takes a single value", line=number, key=key)
            values[key] = converted[0]
        else:
            values.setdefault(key, []).extend(converted)

    if 'process' not in values:
        raise ConfigError("missing required key 'process'", key='process')
    sweeps = {k: values.pop(k) for k in list(values) if k in SWEEP_KEYS}
    try:
        return ExperimentConfig(sweeps=sweeps, **values)
    except TypeError as e:
        raise ConfigError(f"incomplete config: {e}")


def read_config(path) -> ExperimentConfig:
    with open(path, 'r', encoding='utf-8') as fh:
        text = fh.read()
    try:
        return parse_config(text)
    except ConfigError as e:
        raise ConfigError(e.message, line=e.line, key=e.key, source=os.path.basename(str(path))) from e


def _format_value(value):
    return repr(value) if isinstance(value, float) else str(value)


def format_config(config: ExperimentConfig) -> str:
    """ Sweep keys keep the config's own order: it fixes the cell order and with it the cell seeds."""
    fields = {'process': config.process, 'n': config.n, 'h': config.h, 'methods': config.methods,
              'M': config.M, 'alpha': config.alpha, 'side': config.side, 'n_sims': config.n_sims,
              'n_perms': config.n_perms, 'master_seed': config.master_seed, 'workers': config.workers,
              'b_n': config.b_n, 'eps': config.eps}
    lines = []
    for key in ['process', *config.sweeps, *CONFIG_ORDER]:
        value = config.sweeps[key] if key in config.sweeps else fields.get(key)
        if value is None:
            continue
        if isinstance(value, list):
            value = ', '.join(_format_value(v) for v in value)
        else:
            value = _format_value(value)
        lines.append(f"{key} = {value}")
    return '\n'.join(lines) + '\n'


def write_config(config: ExperimentConfig, path):
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(format_config(config))


# RESULT TABLES
def write_csv(table: ResultTable, path):
    """ Header: process,param,n,method,alpha,n_sims,n_perms,reject_rate,mc_se,seed,wall_time_s; failed cells read 'failed'."""
    table.frame.to_csv(path, columns=RESULT_COLUMNS, index=False, na_rep='failed', lineterminator='\n')


def _read_table(path, columns):
    df = pd.read_csv(path, na_values=['failed'], keep_default_na=False, float_precision='round_trip',
                     dtype={'param': str})
    if list(df.columns) != columns:
        raise ConfigError(f"{path}: unexpected header {','.join(df.columns)}")
    return df


def read_csv(path) -> ResultTable:
    return ResultTable(_read_table(path, RESULT_COLUMNS))


def write_power_csv(frame: pd.DataFrame, path):
    frame.to_csv(path, columns=POWER_COLUMNS, index=False, na_rep='failed', lineterminator='\n')


def read_power_csv(path) -> pd.DataFrame:
    return _read_table(path, POWER_COLUMNS)


# REPORTS
def format_report(report) -> str:
    return '\n'.join(report.to_lines())


def report_json(report) -> str:
    return json.dumps(report.to_dict(), sort_keys=False)


def format_error(error: Exception) -> str:
    """ One-line message for the error stream."""
    kind = 'error' if isinstance(error, TrendPermError) else type(error).__name__
    return f"trendperm: {kind}: {error}"
