import pytest

from orbitzeta.liealg import abelian, scaled_sl2


@pytest.fixture(scope="session")
def sl2_p3():
    return scaled_sl2(3)


@pytest.fixture(scope="session")
def sl2_p5():
    return scaled_sl2(5)


@pytest.fixture(scope="session")
def sl2_p3_u2():
    return scaled_sl2(3, 2)


@pytest.fixture(scope="session")
def abelian3():
    return abelian(3, 3)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Call with (number, passed, detail); one summary line per criterion is printed at the end."""
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.config.stash[ACCEPTANCE_KEY].append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
