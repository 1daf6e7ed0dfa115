"""Symmetric 2x2 tensors in an orthonormal 3-component basis.

Strain- and stress-like fields live on two quadrature points per pixel (one
per triangular element) and are stored as real arrays of shape
``(ny, nx, 2, 3)``: pixel row, pixel column, element, component.  The
component order is (t11, t22, sqrt(2)*t12), which makes the plain dot product
of two component vectors equal to the tensor double contraction t:s.
"""

import numpy as np

SQRT2 = np.sqrt(2.0)


def sym_to_vec(t):
    """Map symmetric 2x2 tensor(s) ``(..., 2, 2)`` to components ``(..., 3)``."""
    t = np.asarray(t, dtype=float)
    return np.stack([t[..., 0, 0], t[..., 1, 1], SQRT2 * t[..., 0, 1]], axis=-1)


def vec_to_sym(v):
    """Inverse of :func:`sym_to_vec`."""
    v = np.asarray(v, dtype=float)
    out = np.empty(v.shape[:-1] + (2, 2), dtype=float)
    out[..., 0, 0] = v[..., 0]
    out[..., 1, 1] = v[..., 1]
    out[..., 0, 1] = out[..., 1, 0] = v[..., 2] / SQRT2
    return out


def uniform_field(grid, tensor):
    """Constant quadrature field equal to ``tensor`` (2x2 symmetric) everywhere."""
    vec = sym_to_vec(tensor)
    field = np.empty((grid.ny, grid.nx, 2, 3), dtype=float)
    field[...] = vec
    return field


def check_field(grid, field, name="field"):
    """Validate quadrature-field shape and finiteness; returns a float64 view."""
    field = np.asarray(field, dtype=float)
    if field.shape != (grid.ny, grid.nx, 2, 3):
        raise ValueError(
            f"{name} has shape {field.shape}, expected {(grid.ny, grid.nx, 2, 3)}"
        )
    return field
