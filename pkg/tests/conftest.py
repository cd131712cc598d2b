import pytest

from pedigree_scc.graph_core import build_digraph

ACCEPTANCE_LINES = []


@pytest.fixture
def loop1():
    return build_digraph(1, [(0, 0), (0, 0)])


@pytest.fixture
def cycle3():
    return build_digraph(3, [(0, 1), (0, 1), (1, 2), (1, 2), (2, 0), (2, 0)])


@pytest.fixture
def chain3():
    # 0 =>1 => 2, and 2 carries a double self-loop
    return build_digraph(3, [(0, 1), (0, 1), (1, 2), (1, 2), (2, 2), (2, 2)])


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
