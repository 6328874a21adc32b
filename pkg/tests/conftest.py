import pytest
from hypothesis import HealthCheck, settings

from nilband import FIXTURE_NAMES, load_fixture

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# the five worked examples plus the Heisenberg algebra
WORKED_FIXTURES = ("heisenberg", "example1", "example2", "five_dim", "seven_dim",
                  "region_example")


@pytest.fixture(params=FIXTURE_NAMES)
def any_spec(request):
    return load_fixture(request.param)


@pytest.fixture
def heis():
    return load_fixture("heisenberg")


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
