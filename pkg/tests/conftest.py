import pytest

from plate_spectra import band, model_operator as mo, profiles


@pytest.fixture(scope="session")
def minimum():
    return band.find_minimum()


@pytest.fixture(scope="session")
def disk_consts(minimum):
    return mo.model_constants(profiles.disk(1.0), minimum)


@pytest.fixture(scope="session")
def annulus_consts(minimum):
    return mo.model_constants(profiles.annulus(1.0, 0.5, 1.0), minimum)


@pytest.fixture(scope="session")
def bump_consts(minimum):
    return mo.model_constants(profiles.bump(1.0), minimum)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
