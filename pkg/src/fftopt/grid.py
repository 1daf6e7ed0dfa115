"""Periodic structured grids and discrete gradient stencils.

Each pixel of the ``nx`` x ``ny`` grid is split into two linear triangular
elements; with linear shape functions the gradient is constant per element, so
one quadrature point per element (weight = element area = dx*dy/2) integrates
exactly.  Nodal fields are stored as arrays of shape ``(ny, nx)`` indexed
``[j, i]`` with column ``i`` along the first lattice direction.

Supported lattices:

* ``square``: node (i, j) at (dx*i, dy*j); the pixel is split along the
  (0,1)-(1,0) diagonal into elements {(0,0),(1,0),(0,1)} and
  {(1,1),(0,1),(1,0)}.
* ``hexagonal``: node (i, j) at (dx*(i + j/2), dy*j); rows are staggered by
  half a spacing, giving the two-triangle unit cell of a triangular lattice.
  dy defaults to sqrt(3)/2*dx so the triangles are equilateral.

Stencils are lists of (node offset, coefficient) pairs in index space; all
offsets wrap periodically.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .tensors import SQRT2


class Lattice(str, Enum):
    SQUARE = "square"
    HEXAGONAL = "hexagonal"


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid: pixel counts, lattice spacings and lattice kind."""

    nx: int
    ny: int
    dx: float = 1.0
    dy: float | None = None
    lattice: Lattice = Lattice.SQUARE

    def __post_init__(self):
        lattice = Lattice(self.lattice)
        object.__setattr__(self, "lattice", lattice)
        dy = self.dy
        if dy is None:
            # regular hexagonal grid: equilateral triangles
            dy = self.dx * np.sqrt(3.0) / 2.0 if lattice is Lattice.HEXAGONAL else self.dx
        object.__setattr__(self, "dy", float(dy))
        object.__setattr__(self, "dx", float(self.dx))
        if self.nx < 2 or self.ny < 2:
            raise ConfigurationError(f"grid needs nx, ny >= 2, got {self.nx}x{self.ny}")
        if self.dx <= 0.0 or self.dy <= 0.0:
            raise ConfigurationError(f"spacings must be positive, got dx={self.dx}, dy={self.dy}")

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def lx(self):
        return self.nx * self.dx

    @property
    def ly(self):
        return self.ny * self.dy

    @property
    def cell_area(self):
        """Area per pixel (equal for square and hexagonal lattices)."""
        return self.dx * self.dy

    @property
    def element_area(self):
        return 0.5 * self.dx * self.dy

    @property
    def volume(self):
        return self.lx * self.ly


def node_positions(grid):
    """Cartesian node coordinates, two ``(ny, nx)`` arrays (x, y)."""
    i = np.arange(grid.nx)[None, :]
    j = np.arange(grid.ny)[:, None]
    if grid.lattice is Lattice.HEXAGONAL:
        x = grid.dx * (i + 0.5 * j)
    else:
        x = grid.dx * (i + 0 * j)
    y = grid.dy * (j + 0 * i)
    return x, y


@dataclass(frozen=True)
class GradientStencils:
    """Per-element, per-direction gradient stencils of the two-triangle cell.

    ``entries[e][d]`` is a tuple of ``(s1, s2, coeff)`` triples: the gradient
    component d of element e at pixel (i, j) is sum of coeff * f[i+s1, j+s2]
    with periodic wraparound.  Coefficients of each stencil sum to zero and
    reproduce gradients of nodally sampled affine functions exactly.
    """

    grid: GridSpec
    entries: tuple = field(repr=False)


def build_stencils(grid):
    """Construct the discrete gradient stencils for ``grid``."""
    dx, dy = grid.dx, grid.dy
    if grid.lattice is Lattice.SQUARE:
        entries = (
            (  # element 1: nodes (0,0), (1,0), (0,1)
                ((1, 0, 1.0 / dx), (0, 0, -1.0 / dx)),
                ((0, 1, 1.0 / dy), (0, 0, -1.0 / dy)),
            ),
            (  # element 2: nodes (1,1), (0,1), (1,0)
                ((1, 1, 1.0 / dx), (0, 1, -1.0 / dx)),
                ((1, 1, 1.0 / dy), (1, 0, -1.0 / dy)),
            ),
        )
    elif grid.lattice is Lattice.HEXAGONAL:
        # The skewed element coordinates make the y-stencils three-point.
        entries = (
            (
                ((1, 0, 1.0 / dx), (0, 0, -1.0 / dx)),
                ((0, 1, 1.0 / dy), (0, 0, -0.5 / dy), (1, 0, -0.5 / dy)),
            ),
            (
                ((1, 1, 1.0 / dx), (0, 1, -1.0 / dx)),
                ((1, 0, -1.0 / dy), (0, 1, 0.5 / dy), (1, 1, 0.5 / dy)),
            ),
        )
    else:  # pragma: no cover - Lattice() already rejects unknown kinds
        raise ConfigurationError(f"unsupported lattice: {grid.lattice!r}")
    return GradientStencils(grid=grid, entries=entries)


def element_gradient(stencils, nodal_field):
    """Apply the gradient stencils to a periodic nodal field.

    ``nodal_field`` has shape ``(ny, nx)`` or ``(ny, nx, k)`` for k components;
    the result has shape ``(ny, nx, 2, 2[, k])`` with axes (pixel row, pixel
    column, element, direction[, component]).
    """
    grid = stencils.grid
    f = np.asarray(nodal_field, dtype=float)
    if f.shape[:2] != (grid.ny, grid.nx):
        raise ValueError(f"nodal field has shape {f.shape}, expected leading {(grid.ny, grid.nx)}")
    out = np.zeros((grid.ny, grid.nx, 2, 2) + f.shape[2:], dtype=float)
    for e in range(2):
        for d in range(2):
            acc = out[:, :, e, d]
            for s1, s2, coeff in stencils.entries[e][d]:
                acc += coeff * np.roll(f, shift=(-s2, -s1), axis=(0, 1))
    return out


def element_gradient_adjoint(stencils, grads):
    """Transpose of :func:`element_gradient` under the plain dot product.

    Scatters per-element gradient data ``(ny, nx, 2, 2)`` back to a nodal
    field ``(ny, nx)``; used to differentiate energies of the discrete
    gradient without re-deriving stencil geometry.
    """
    grid = stencils.grid
    g = np.asarray(grads, dtype=float)
    if g.shape != (grid.ny, grid.nx, 2, 2):
        raise ValueError(f"gradient field has shape {g.shape}, expected {(grid.ny, grid.nx, 2, 2)}")
    out = np.zeros((grid.ny, grid.nx), dtype=float)
    for e in range(2):
        for d in range(2):
            for s1, s2, coeff in stencils.entries[e][d]:
                out += coeff * np.roll(g[:, :, e, d], shift=(s2, s1), axis=(0, 1))
    return out


def symmetric_gradient(stencils, displacement):
    """Symmetrized gradient of a nodal displacement field ``(ny, nx, 2)``.

    Returns the quadrature strain field ``(ny, nx, 2, 3)`` in the orthonormal
    component basis; by construction the result lies in the compatible
    subspace.
    """
    g = element_gradient(stencils, displacement)  # (ny, nx, e, d, comp)
    out = np.empty(g.shape[:3] + (3,), dtype=float)
    out[..., 0] = g[..., 0, 0]
    out[..., 1] = g[..., 1, 1]
    out[..., 2] = (g[..., 1, 0] + g[..., 0, 1]) / SQRT2
    return out


def derivative_factors(stencils, q):
    """Fourier symbol D(q) of the stencils, a (2 elements x 2 directions) matrix.

    Convention: with the unnormalized forward transform
    fhat(q) = sum_x f(x) exp(-2*pi*i*q.x/N), the element gradients equal the
    inverse transform of D(q) * fhat(q), hence
    D[e, d] = sum_(s, c) c * exp(+2*pi*i*(q1*s1/nx + q2*s2/ny)).
    """
    grid = stencils.grid
    q1, q2 = q
    if not (0 <= q1 < grid.nx and 0 <= q2 < grid.ny):
        raise IndexError(f"wavevector {q} outside [0,{grid.nx}) x [0,{grid.ny})")
    out = np.zeros((2, 2), dtype=complex)
    for e in range(2):
        for d in range(2):
            for s1, s2, coeff in stencils.entries[e][d]:
                phase = 2.0j * np.pi * (q1 * s1 / grid.nx + q2 * s2 / grid.ny)
                out[e, d] += coeff * np.exp(phase)
    return out


def derivative_factor_table(stencils):
    """D(q) for every mode at once, shape ``(ny, nx, 2, 2)`` complex."""
    grid = stencils.grid
    q1 = np.arange(grid.nx)[None, :]
    q2 = np.arange(grid.ny)[:, None]
    out = np.zeros((grid.ny, grid.nx, 2, 2), dtype=complex)
    for e in range(2):
        for d in range(2):
            for s1, s2, coeff in stencils.entries[e][d]:
                out[:, :, e, d] += coeff * np.exp(
                    2.0j * np.pi * (q1 * s1 / grid.nx + q2 * s2 / grid.ny)
                )
    return out
