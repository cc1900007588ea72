import math

import numpy as np
import pytest

from steposc.potentials import PotentialSpec, StepRegion
from steposc.schrodinger import solve

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def harmonic_11():
    return PotentialSpec.harmonic(1.0), PotentialSpec.harmonic(1.0)


@pytest.fixture(scope="session")
def harmonic_1r2():
    return PotentialSpec.harmonic(1.0), PotentialSpec.harmonic(SQRT2)


@pytest.fixture(scope="session")
def origin():
    return StepRegion(0.0, 0.0)


@pytest.fixture(scope="session")
def small_step_spectrum(harmonic_11, origin):
    """Lowest 40 levels of the omega = (1, 1) step oscillator on a coarse grid."""
    V1, V2 = harmonic_11
    return solve(V1, V2, origin, 40, E_max=14.0, points_per_wavelength=8.0)


@pytest.fixture(scope="session")
def small_smooth_spectrum(harmonic_1r2):
    V1, V2 = harmonic_1r2
    return solve(V1, V2, None, 20, E_max=10.0, points_per_wavelength=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE = {}


@pytest.fixture
def criterion(capsys):
    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        with capsys.disabled():
            print("\n" + line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
