import random

import pytest

from qmlab.cmtaylor import load_registry
from qmlab.qmring import QMPoly

_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        outcome = "XFAIL" if hasattr(report, "wasxfail") else ("PASS" if report.passed else "FAIL")
        _acceptance.append((report.nodeid.split("::", 1)[1], outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{outcome:<5}  {name}")


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def pt_i(registry):
    return registry["i"]


@pytest.fixture(scope="session")
def pt_7(registry):
    return registry["tau7"]


def random_poly(rng: random.Random, weight: int, with_p: bool = True, nterms: int = 3, den: int = 6) -> QMPoly:
    """Random weight-homogeneous polynomial with small rational coefficients."""
    monos = [
        (a, b, c)
        for a in range(weight // 2 + 1)
        for b in range(weight // 4 + 1)
        for c in range(weight // 6 + 1)
        if 2 * a + 4 * b + 6 * c == weight and (with_p or a == 0)
    ]
    picks = rng.sample(monos, min(nterms, len(monos)))
    from fractions import Fraction

    terms = {e: Fraction(rng.randint(-9, 9) or 1, rng.randint(1, den)) for e in picks}
    return QMPoly(terms, weight)
