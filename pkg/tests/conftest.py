import numpy as np
import pytest

from libs import permutation
from libs.series import TimeSeries


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run the Monte Carlo acceptance tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_tables():
    permutation.clear_tables()
    yield
    permutation.clear_tables()


@pytest.fixture
def iid_series():
    return TimeSeries(np.random.default_rng(12345).standard_normal(60))


@pytest.fixture
def increasing_series():
    return TimeSeries(np.arange(1.0, 101.0))
