import os
import logging
from dotenv import load_dotenv

from libs.errors import ConfigError

load_dotenv()

# TEST DEFAULTS
ALPHA = float(os.getenv('TRENDPERM_ALPHA', '0.05'))
N_PERMS = int(os.getenv('TRENDPERM_N_PERMS', '1000'))
EPS = float(os.getenv('TRENDPERM_EPS', '1e-3'))
SIDE = os.getenv('TRENDPERM_SIDE', 'greater')

# PERMUTATION ENGINE
ENUMERATION_LIMIT = int(os.getenv('TRENDPERM_ENUMERATION_LIMIT', '8'))
TABLE_DIR = os.getenv('TRENDPERM_TABLE_DIR', '.trendperm_tables')

# HARNESS
WORKERS_ENV = 'TRENDPERM_WORKERS'
LOG_LEVEL = os.getenv('TRENDPERM_LOG_LEVEL', 'WARNING')


def resolve_workers(cli_value=None, config_value=None):
    """ Worker count: CLI flag > TRENDPERM_WORKERS > config file > 1."""
    if cli_value is not None:
        workers = cli_value
    elif os.getenv(WORKERS_ENV):
        raw = os.getenv(WORKERS_ENV)
        try:
            workers = int(raw)  # type: ignore
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer >= 1, got {raw!r}", key=WORKERS_ENV)
    elif config_value is not None:
        workers = config_value
    else:
        workers = 1
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}", key='workers')
    return workers


def configure_logging(level=None):
    logger = logging.getLogger('trendperm')
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
        logger.addHandler(handler)
    logger.setLevel(level or LOG_LEVEL)
    return logger
