import numpy as np
import pytest

from wbarray.manifold import (
    SPEED_OF_LIGHT,
    ElementPattern,
    FrequencyGrid,
    RingArrayGeometry,
    WidebandManifold,
    uniform_linear_array,
)

CARRIER = 33e9
B_LOW = 1e9
B_HIGH = 12e9


def paper_manifold(bandwidth, pattern=None, normalize=True):
    """8-element patch ring, spacing 3 wavelengths of the lowest 1 GHz sub-carrier."""
    low = FrequencyGrid(CARRIER, B_LOW, 32)
    geom = RingArrayGeometry(8, 3 * low.lowest_wavelength)
    pattern = pattern or ElementPattern("patch", 1.0)
    return WidebandManifold(geom, pattern, FrequencyGrid(CARRIER, bandwidth, 32), normalize)


def narrowband_ula(n_elements, freq=CARRIER, normalize=False):
    """Single-frequency isotropic ULA along y with half-wavelength spacing."""
    lam = SPEED_OF_LIGHT / freq
    return WidebandManifold(
        uniform_linear_array(n_elements, lam / 2),
        ElementPattern("isotropic"),
        FrequencyGrid(freq, 0.0, 1),
        normalize,
    )


@pytest.fixture(scope="session")
def paper_low():
    return paper_manifold(B_LOW)


@pytest.fixture(scope="session")
def paper_high():
    return paper_manifold(B_HIGH)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(criterion, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
