"""Compatibility projector: algebraic properties and a dense oracle.

The operator must be an orthogonal projector onto the span of symmetrized
discrete gradients of periodic displacement fields, with the mean removed.
Its FFT implementation is compared against a dense real-space construction
of exactly that subspace on small grids.
"""

import numpy as np
import pytest

from fftopt import build_projection, build_stencils
from fftopt.grid import symmetric_gradient
from fftopt.projection import apply, field_inner, is_self_adjoint_check

from conftest import make_grid, random_compatible, random_field

SIZES = [(4, 4), (5, 5), (31, 31)]


@pytest.mark.parametrize("nx,ny", SIZES)
def test_idempotent(nx, ny, lattice, rng):
    grid = make_grid(nx, ny, lattice)
    op = build_projection(grid)
    for _ in range(3):
        x = random_field(grid, rng)
        gx = apply(op, x)
        ggx = apply(op, gx)
        err = np.linalg.norm(ggx - gx) / np.linalg.norm(gx)
        assert err <= 1e-12


@pytest.mark.parametrize("nx,ny", SIZES)
def test_self_adjoint(nx, ny, lattice, rng):
    grid = make_grid(nx, ny, lattice)
    op = build_projection(grid)
    for _ in range(3):
        a = random_field(grid, rng)
        b = random_field(grid, rng)
        left, right = is_self_adjoint_check(op, a, b)
        scale = max(abs(left), abs(right), 1e-300)
        assert abs(left - right) / scale <= 1e-12


@pytest.mark.parametrize("nx,ny", SIZES)
def test_zero_mean_output(nx, ny, lattice, rng):
    grid = make_grid(nx, ny, lattice)
    op = build_projection(grid)
    x = random_field(grid, rng)
    gx = apply(op, x)
    mean = gx.mean(axis=(0, 1, 2))
    assert np.max(np.abs(mean)) <= 1e-12 * np.linalg.norm(x)


@pytest.mark.parametrize("nx,ny", SIZES)
def test_compatible_fields_are_fixed_points(nx, ny, lattice, rng):
    grid = make_grid(nx, ny, lattice)
    op = build_projection(grid)
    for _ in range(3):
        c = random_compatible(grid, rng)
        gc = apply(op, c)
        err = np.linalg.norm(gc - c) / np.linalg.norm(c)
        assert err <= 1e-12


def dense_projector(grid):
    """Orthogonal projector onto zero-mean symmetrized gradients, dense.

    Columns of S are the symmetrized discrete gradients of all 2*nx*ny nodal
    displacement unit vectors, flattened; the quadrature weight is constant so
    plain least squares gives the projector for the quadrature inner product.
    """
    stencils = build_stencils(grid)
    n = grid.nx * grid.ny
    cols = []
    for dof in range(2 * n):
        u = np.zeros((grid.ny, grid.nx, 2))
        u.reshape(-1)[dof] = 1.0
        cols.append(symmetric_gradient(stencils, u).reshape(-1))
    s = np.column_stack(cols)
    return s @ np.linalg.pinv(s, rcond=1e-12)


@pytest.mark.parametrize("nx,ny", [(2, 2), (3, 3), (4, 4), (4, 3)])
def test_dense_oracle_agreement(nx, ny, lattice, rng):
    grid = make_grid(nx, ny, lattice)
    op = build_projection(grid)
    dense = dense_projector(grid)
    for _ in range(5):
        x = random_field(grid, rng)
        gx = apply(op, x)
        ref = (dense @ x.reshape(-1)).reshape(x.shape)
        err = np.linalg.norm(gx - ref) / np.linalg.norm(x)
        assert err <= 1e-10


def test_projection_norm_contraction(lattice, rng):
    # orthogonal projectors never lengthen a field
    grid = make_grid(6, 5, lattice)
    op = build_projection(grid)
    for _ in range(5):
        x = random_field(grid, rng)
        assert np.linalg.norm(apply(op, x)) <= np.linalg.norm(x) * (1.0 + 1e-12)


def test_inner_product_weighting(lattice):
    grid = make_grid(3, 4, lattice, dx=0.25)
    ones = np.ones((grid.ny, grid.nx, 2, 3))
    # 6 unit entries per pixel, each with element area dx*dy/2
    expected = grid.element_area * 6 * grid.nx * grid.ny
    assert field_inner(grid, ones, ones) == pytest.approx(expected, rel=1e-14)
