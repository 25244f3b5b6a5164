from fractions import Fraction

import pytest
from hypothesis import settings

from irrmeasure.exactmath import Polynomial

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def x() -> Polynomial:
    return Polynomial([0, 1], "x")


def poly(*coeffs, var: str = "x") -> Polynomial:
    return Polynomial([Fraction(c) for c in coeffs], var)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance check and assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
