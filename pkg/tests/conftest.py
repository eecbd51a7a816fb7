import pytest

from tensorstab.io import builtin_example


@pytest.fixture(scope="session")
def example():
    """The orthogonal sheaf I_2 + I_1 + O on P2 with its form."""
    return builtin_example()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
