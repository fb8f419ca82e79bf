import subprocess
import sys
import time

import numpy as np
import pytest
from hypothesis import settings

from casimir_nernst import (
    ConstantRelaxation,
    Drude,
    Plasma,
    PlateSystem,
    fit_asymptotic_coefficients,
    gold_bloch_gruneisen,
    scaling_check,
)
from casimir_nernst.thermo import entropy_curve

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

NU0_TYPICAL = 34.5e-3
NU0_SYNTH = 3.45

# grids used by the Nernst classification (strictly decreasing)
PLASMA_GRID = np.geomspace(1.0, 1e-2, 8)
IMPURE_GRID = np.geomspace(1.0, 1e-8, 25)
PERFECT_GRID = np.geomspace(0.5, 5e-3, 8)

_CRITERIA: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title} | {detail}"
    _CRITERIA.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


class Timed:
    def __init__(self, value, seconds):
        self.value = value
        self.seconds = seconds


def _timed(func, *args, **kwargs):
    t0 = time.perf_counter()
    value = func(*args, **kwargs)
    return Timed(value, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def plasma_system():
    return PlateSystem(1e-6, Plasma(9000.0))


@pytest.fixture(scope="session")
def impure_system():
    return PlateSystem(1e-6, Drude(9000.0, ConstantRelaxation(NU0_TYPICAL)))


@pytest.fixture(scope="session")
def synthetic_system():
    return PlateSystem(1e-6, Drude(9000.0, ConstantRelaxation(NU0_SYNTH)))


@pytest.fixture(scope="session")
def perfect_system():
    return PlateSystem(1e-6, Drude(9000.0, gold_bloch_gruneisen(0.0)))


@pytest.fixture(scope="session")
def synthetic_fit(synthetic_system):
    return _timed(fit_asymptotic_coefficients, synthetic_system)


@pytest.fixture(scope="session")
def typical_fit(impure_system):
    return _timed(fit_asymptotic_coefficients, impure_system)


@pytest.fixture(scope="session")
def scaling_table():
    return _timed(scaling_check, 1e-6, [NU0_SYNTH, 0.345])


@pytest.fixture(scope="session")
def plasma_entropy(plasma_system):
    return _timed(entropy_curve, plasma_system, PLASMA_GRID)


@pytest.fixture(scope="session")
def impure_entropy(impure_system):
    return _timed(entropy_curve, impure_system, IMPURE_GRID)


@pytest.fixture(scope="session")
def perfect_entropy(perfect_system):
    return _timed(entropy_curve, perfect_system, PERFECT_GRID)


def run_cli(*args, cwd=None):
    """Run the command-line driver in a fresh interpreter."""
    return subprocess.run([sys.executable, "-m", "casimir_nernst", *args],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="session")
def verify_default():
    return _timed(run_cli, "verify")
