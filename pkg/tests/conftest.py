import os

import mpmath
import pytest
from hypothesis import HealthCheck, settings

from nikhp import precision
from nikhp.measures import chebyshev, legendre, nikishin_system

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _restore_precision():
    bits = precision.get_precision()
    yield
    precision.set_precision(bits)


@pytest.fixture(scope="session")
def reference_system():
    """sigma_1 Chebyshev weight on [-1, 1], sigma_2 Lebesgue on [2, 3]."""
    with precision.working_precision(precision.DEFAULT_PRECISION):
        return nikishin_system([chebyshev(-1, 1, 64), legendre(2, 3, 64)])


@pytest.fixture(scope="session")
def chebyshev_m1():
    """Normalised arcsine measure dx / (pi sqrt(1 - x^2))."""
    with precision.working_precision(precision.DEFAULT_PRECISION):
        return nikishin_system([chebyshev(-1, 1, 64, scale=1 / mpmath.pi)])


@pytest.fixture(scope="session")
def three_system():
    with precision.working_precision(precision.DEFAULT_PRECISION):
        return nikishin_system([chebyshev(-1, 1, 48), legendre(2, 3, 48),
                                chebyshev(4, 5, 48)])


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str = "") -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
