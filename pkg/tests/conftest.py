import pytest

from smsd.channel import make_stream


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record a PASS/FAIL line for an acceptance criterion and print it."""

    def _report(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        request.config._acceptance_lines.append(line)
        print(line)
        return ok

    return _report


@pytest.fixture
def rng():
    return make_stream(12345)

