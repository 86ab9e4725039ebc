import math

import numpy as np
import pytest

from photomech.params import baseline_fig2

_ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


class AcceptanceLog:
    """Collects one verdict per acceptance criterion for the terminal summary."""

    def record(self, number: int, title: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE[number] = (bool(passed), title, detail)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, title, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")


@pytest.fixture
def baseline():
    return baseline_fig2()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_system(rng, stable_only=False):
    """Random point in the normalized parameter ranges used throughout the figures."""
    from photomech.stability import characteristic_coefficients, is_stable
    from photomech.steady_state import operating_point

    while True:
        s = baseline_fig2().with_normalized(
            delta=float(rng.uniform(0.1, 3.0)),
            gamma1=float(math.exp(rng.uniform(math.log(0.05), math.log(10.0)))),
            gamma2_ratio=float(rng.uniform(0.0, 1.0)),
            tau=float(math.exp(rng.uniform(math.log(0.1), math.log(10.0)))),
            power_mW=float(math.exp(rng.uniform(math.log(0.1), math.log(50.0)))),
        )
        if not stable_only:
            return s
        op = operating_point(s)
        if is_stable(characteristic_coefficients(op, s)).stable:
            return s
