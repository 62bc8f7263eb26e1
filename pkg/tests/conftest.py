import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from armsc.evaluation import SubspaceSpec, generate_subspaces  # noqa: E402


@pytest.fixture(scope="session")
def five_subspaces():
    """Noiseless independent data: m=50, five 4-dim subspaces, 40 points each."""
    return generate_subspaces(SubspaceSpec(50, 5, 4, 40, seed=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
