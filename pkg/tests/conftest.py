import pytest
from hypothesis import settings

from snmcache.model import DeterministicVolume, ParetoVolume, RectangularProfile, SnmModel, study_model

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def unit_model():
    """Rectangular L=1, every content requested once on average, one entry per day."""
    return SnmModel(1.0, RectangularProfile(1.0), DeterministicVolume(1.0))


@pytest.fixture
def desk_model():
    return study_model(100.0, 30.0, 2.0)


@pytest.fixture
def pareto():
    return ParetoVolume(1.5, 2.0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
