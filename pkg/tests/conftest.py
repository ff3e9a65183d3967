import numpy as np
import pytest

from amgc.refindex import build_index, ref_from_bases
from amgc.simgen import random_reference


@pytest.fixture(scope="session")
def small_ref():
    return ref_from_bases(random_reference(20_000, np.random.default_rng(11)))


@pytest.fixture(scope="session")
def small_index(small_ref):
    return build_index(small_ref)


@pytest.fixture(scope="session")
def medium_ref():
    return ref_from_bases(random_reference(200_000, np.random.default_rng(12), n_runs=4))


@pytest.fixture(scope="session")
def medium_index(medium_ref):
    return build_index(medium_ref)


# acceptance verdicts, filled by tests/test_acceptance.py and printed after the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
