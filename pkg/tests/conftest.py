import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

_CRITERIA: list = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, ok, detail)``."""
    def record(name: str, ok: bool, detail: str = "") -> bool:
        _CRITERIA.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        print(_CRITERIA[-1])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
