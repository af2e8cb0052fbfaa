import numpy as np
import pytest

from offgrid_doa.array_model import AngularGrid, ArrayGeometry, build_dictionary
from offgrid_doa.signal_sim import Scenario, assemble_measurement, derive_seed, exact_covariance, measure

DESK_THETAS = (13.2220, 28.6022)


def desk_measurement(snr_db, trial=0, base_seed=0):
    """The desk instance: M=8, T=100, seed ``derive_seed(base_seed, trial)`` at any SNR."""
    scen = Scenario.from_snr(DESK_THETAS, snr_db, 100, seed=derive_seed(base_seed, trial))
    return measure(scen, ArrayGeometry.ula(8))


def exact_measurement(thetas, powers, geometry, noise=1.0):
    scen = Scenario(tuple(thetas), tuple(powers), noise, 100, 0)
    return assemble_measurement(exact_covariance(scen, geometry))


@pytest.fixture(scope="session")
def desk_geometry():
    return ArrayGeometry.ula(8)


@pytest.fixture(scope="session")
def desk_grid():
    return AngularGrid.default()


@pytest.fixture(scope="session")
def desk_dictionary(desk_geometry, desk_grid):
    return build_dictionary(desk_geometry, desk_grid)


@pytest.fixture(scope="session")
def small_geometry():
    return ArrayGeometry.ula(4)


@pytest.fixture(scope="session")
def small_grid():
    return AngularGrid(-40.0, 5.0, 16)


@pytest.fixture(scope="session")
def small_dictionary(small_geometry, small_grid):
    return build_dictionary(small_geometry, small_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report: test_acceptance.py fills this, the hook prints it
ACCEPTANCE = {}


def report_criterion(number, passed, detail):
    line = f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
