import numpy as np
import pytest

from diffnn.netmodel import ArchSpec, generate_network

# criterion number -> (title, passed); filled from test reports
_CRITERIA: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, [title, True])
    entry[1] = entry[1] and not rep.failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def rnn48():
    return generate_network(ArchSpec.parse("rnn:4x8"), 3)


@pytest.fixture(scope="session")
def lstm34():
    return generate_network(ArchSpec.parse("lstm:3x4"), 3)


@pytest.fixture(scope="session")
def ffnn316():
    return generate_network(ArchSpec.parse("ffnn:3x16"), 3)
