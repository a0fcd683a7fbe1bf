import math

import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

thetas = st.floats(min_value=0.0, max_value=math.pi / 2, allow_nan=False)
phis = st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True, allow_nan=False)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log():
    def log(number, name, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name} ({detail})"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return log
