import pytest

from rydberg_wkb.params import ModelParams, load_params

# filled by test_acceptance.py; echoed in the terminal summary
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture(scope="session")
def rb():
    return load_params()


@pytest.fixture(scope="session")
def hydrogen():
    return ModelParams.pure_coulomb()


@pytest.fixture(scope="session")
def hydrogen_no_fs():
    return ModelParams.pure_coulomb(alpha_fs=0.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[1])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
