import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("radbound", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("radbound")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria suite")


@pytest.fixture(params=["python", "compiled"])
def backend(request):
    from radbound import _fallback
    if request.param == "python":
        return _fallback
    return pytest.importorskip("radbound._kernels")


CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line: call with (number, passed, detail)."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        CRITERIA[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
