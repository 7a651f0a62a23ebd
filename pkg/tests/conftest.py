import pytest

from overlapforge import EpsilonSpec, run


def brute_marker(q):
    """Smallest L with 2^(L-1) - 1 <= q < 2^L - 1, found by counting up."""
    L = 1
    while not (2 ** (L - 1) - 1 <= q < 2**L - 1):
        L += 1
    return L


@pytest.fixture(scope="session")
def pow8():
    return EpsilonSpec("pow8")


@pytest.fixture(scope="session")
def state2(pow8):
    return run(pow8, 2)


@pytest.fixture(scope="session")
def state3(pow8):
    return run(pow8, 3)


@pytest.fixture(scope="session")
def state4(pow8):
    return run(pow8, 4)


_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
