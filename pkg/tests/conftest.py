"""Shared helpers for the test suite."""

import numpy as np
import pytest

from fftopt import GridSpec, build_projection, build_stencils
from fftopt.grid import symmetric_gradient


def make_grid(nx, ny, lattice="square", dx=1.0):
    return GridSpec(nx=nx, ny=ny, dx=dx, lattice=lattice)


def random_field(grid, rng):
    """Random quadrature tensor field (ny, nx, 2, 3)."""
    return rng.standard_normal((grid.ny, grid.nx, 2, 3))


def random_compatible(grid, rng, stencils=None):
    """Symmetrized gradient of a random periodic displacement field."""
    if stencils is None:
        stencils = build_stencils(grid)
    u = rng.standard_normal((grid.ny, grid.nx, 2))
    return symmetric_gradient(stencils, u)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(params=["square", "hexagonal"])
def lattice(request):
    return request.param
