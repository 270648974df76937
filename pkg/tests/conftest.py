import numpy as np
import pytest

from subpressure.ordered import DiagonalSystem
from subpressure.linalg import MatrixSystem

EX1 = [[0.9, 0.4, 0.6], [0.1, 0.4, 0.2]]
EX2 = [[0.1, 0.2, 0.9], [0.9, 0.4, 0.2]]
EX3 = [[0.9, 0.5, 0.8], [0.9, 0.5, 0.01]]

T1 = [
    [2, -6, 15, 0, -2, 0, 2],
    [0, -1, 0, 1, -6, 0, 0],
    [0, 0, 10, 4, 9, 6, 0],
    [0, 0, 0, 8, -2, 0, 1],
    [0, 0, 0, 0, -5, -3, 4],
    [0, 0, 0, 0, 0, 7, 7],
    [0, 0, 0, 0, 0, 0, 4],
]
T2 = [
    [3, 2, 5, 0, -6, -4, 2],
    [0, 1, 2, 8, 6, 1, 6],
    [0, 0, -14, 1, 1, 13, 3],
    [0, 0, 0, 11, 9, 0, 9],
    [0, 0, 0, 0, 4, 10, 1],
    [0, 0, 0, 0, 0, -15, -5],
    [0, 0, 0, 0, 0, 0, 2],
]


@pytest.fixture
def ex1_ds():
    return DiagonalSystem.from_values(EX1)


@pytest.fixture
def ex1_system():
    return MatrixSystem.from_diagonals(EX1)


@pytest.fixture
def big_system():
    return MatrixSystem((np.array(T1, float), np.array(T2, float)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# Acceptance criteria report: one line per criterion at the end of the run.

_criteria: dict[int, tuple[str, list[str]]] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, text = marker
    outcomes = _criteria.setdefault(number, (text, []))[1]
    if report.when == "call" or report.failed:
        outcomes.append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        text, outcomes = _criteria[number]
        ok = outcomes and all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")
