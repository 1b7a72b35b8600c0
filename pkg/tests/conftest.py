import numpy as np
import pytest

from bsq.fields import Grid, RealField, dealias, to_spectral


@pytest.fixture
def grid64():
    return Grid(64)


@pytest.fixture
def nodes64(grid64):
    return grid64.nodes()


def spectral(grid, samples):
    """Dealiased spectral field from collocation samples."""
    return dealias(to_spectral(RealField(grid, samples)))


@pytest.fixture
def make_field(grid64):
    def _make(samples):
        return spectral(grid64, samples)
    return _make
