import numpy as np
import pytest

from gauge_dnls import Coefficients, Field, make_grid


@pytest.fixture
def grid():
    return make_grid(512, 80.0)


@pytest.fixture
def gaussian(grid):
    return Field.from_function(grid, lambda x: 0.5 * np.exp(-(x**2)))


@pytest.fixture
def special():
    return Coefficients(0.5j, 1j)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_random(grid, rng, amplitude=0.5, decay=3.0, window=2.0):
    """Windowed random field with algebraically decaying spectrum."""
    coeffs = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * (1 + grid.freqs**2) ** (-decay / 2)
    vals = np.fft.ifft(coeffs) * np.exp(-((grid.points / window) ** 2))
    return Field(grid, amplitude * vals / np.abs(vals).max())
