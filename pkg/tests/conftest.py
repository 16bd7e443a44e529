import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from charvar.graphs import dumbbell_marking, theta_marking  # noqa: E402

GRAPH_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "graphs")


@pytest.fixture
def theta():
    return theta_marking()


@pytest.fixture
def dumbbell():
    return dumbbell_marking()


@pytest.fixture
def graph_dir():
    return GRAPH_DIR


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
