import pytest

from cunningham_lb import family
from cunningham_lb.verify import parity_run, visited_states


@pytest.fixture(scope="session")
def trace3():
    return parity_run(3)


@pytest.fixture(scope="session")
def trace4():
    return parity_run(4)


@pytest.fixture(scope="session")
def states3(trace3):
    return visited_states(3, trace3)


@pytest.fixture(scope="session")
def game3():
    return family.build_game(3)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
