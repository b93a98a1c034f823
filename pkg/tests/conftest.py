import random

import pytest

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return random.Random(20240531)


@pytest.fixture
def report():
    """Record one acceptance line; printed again in the terminal summary."""
    def record(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
