import sys

import numpy as np
import pytest

from genauto import ipd


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def uniform():
    return ipd.make_uniform()


@pytest.fixture
def all_ones():
    return ipd.build_strategy(ipd.StrategyParams(1, 1, 1, 1, 1, 1))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
