import pytest

from slspec.problems import builtin
from slspec.sampling import SamplingConfig, build_sample_table


@pytest.fixture(scope="session")
def ex33():
    return builtin("ex3.3")


@pytest.fixture(scope="session")
def ex33_table(ex33):
    return build_sample_table(ex33, SamplingConfig(N=40, m=10, b=ex33.b))


@pytest.fixture(scope="session")
def ex34():
    return builtin("ex3.4")


@pytest.fixture(scope="session")
def ex34_table(ex34):
    return build_sample_table(ex34, SamplingConfig(N=40, m=10, b=ex34.b))


@pytest.fixture(scope="session")
def zero_dirichlet():
    return builtin("dirichlet-const(0)")


@pytest.fixture(scope="session")
def zero_table(zero_dirichlet):
    return build_sample_table(zero_dirichlet, SamplingConfig(N=40, m=10, b=1.0))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.result_lines():
        terminalreporter.write_line(line)
