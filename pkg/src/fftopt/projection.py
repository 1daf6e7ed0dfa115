"""Compatibility projection operator, block-diagonal in Fourier space.

A per-element symmetric tensor field is compatible when it is the symmetrized
discrete gradient of some periodic nodal displacement.  Per wavevector q the
compatible amplitudes form the column space of a 6x2 matrix B(q) built from
the stencil Fourier symbols, so the orthogonal projector onto the compatible
subspace is Ghat(q) = B (B^H B)^+ B^H.  The zero mode is projected out
entirely: mean strain is imposed separately by the load, fluctuations have
zero mean.

Fields use the orthonormal symmetric-tensor basis (t11, t22, sqrt(2) t12), so
Hermiticity of the blocks is self-adjointness under the double contraction.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NumericalConsistencyError
from .grid import build_stencils, derivative_factor_table
from .tensors import SQRT2, check_field

# singular values of B^H B below this, relative to the largest, count as zero
PINV_RTOL = 1e-12

# imaginary residue of the back-transformed field above this, relative to the
# input norm, indicates a broken conjugate symmetry
IMAG_RTOL = 1e-12


@dataclass(frozen=True)
class ProjectionOperator:
    """Precomputed per-mode projector blocks for one grid."""

    grid: object
    blocks: np.ndarray = field(repr=False)  # (ny, nx, 6, 6) complex

    def apply(self, values, out=None):
        return apply(self, values, out=out)


def _conjugate_modes(a):
    """Reindex a per-mode array from q to -q (mod grid size) on axes 0, 1."""
    return np.roll(np.flip(a, axis=(0, 1)), shift=(1, 1), axis=(0, 1))


def basis_matrix(factors):
    """Stack stencil symbols D(q) (..., 2, 2) into B(q) of shape (..., 6, 2).

    Column v of B holds the orthonormal components of sym(D_e(q) (x) v) for
    both elements: rows 3e..3e+2 are (D_x v_x, D_y v_y, (D_y v_x + D_x v_y)/sqrt(2)).
    """
    factors = np.asarray(factors, dtype=complex)
    lead = factors.shape[:-2]
    b = np.zeros(lead + (6, 2), dtype=complex)
    for e in range(2):
        dx = factors[..., e, 0]
        dy = factors[..., e, 1]
        b[..., 3 * e + 0, 0] = dx
        b[..., 3 * e + 1, 1] = dy
        b[..., 3 * e + 2, 0] = dy / SQRT2
        b[..., 3 * e + 2, 1] = dx / SQRT2
    return b


def build_projection(grid, stencils=None):
    """Assemble the projector blocks for every Fourier mode of ``grid``."""
    if stencils is None:
        stencils = build_stencils(grid)
    b = basis_matrix(derivative_factor_table(stencils))  # (ny, nx, 6, 2)
    bh = np.conj(np.swapaxes(b, -1, -2))
    gram = bh @ b  # (ny, nx, 2, 2)
    blocks = b @ np.linalg.pinv(gram, rcond=PINV_RTOL, hermitian=True) @ bh
    # Exact structure the construction only guarantees up to roundoff:
    # Hermitian blocks, conjugate-symmetric mode pairing (real output for
    # real input) and an exactly void zero mode.
    blocks = 0.5 * (blocks + np.conj(np.swapaxes(blocks, -1, -2)))
    blocks = 0.5 * (blocks + np.conj(_conjugate_modes(blocks)))
    blocks[0, 0] = 0.0
    return ProjectionOperator(grid=grid, blocks=blocks)


def apply(op, values, out=None):
    """Project a per-element tensor field ``(ny, nx, 2, 3)`` onto compatibility.

    FFT over the pixel axes, per-mode multiplication of the stacked 6-vector
    by the projector block, inverse FFT.  The result of a real input is real
    up to roundoff; a larger imaginary residue raises
    :class:`NumericalConsistencyError`.
    """
    grid = op.grid
    check_field(grid, values, "projected field")
    flat = np.asarray(values, dtype=float).reshape(grid.ny, grid.nx, 6)
    vhat = np.fft.fft2(flat, axes=(0, 1))
    ghat = kernels.mode_apply(op.blocks, vhat)
    proj = np.fft.ifft2(ghat, axes=(0, 1))
    scale = np.linalg.norm(flat)
    residue = np.linalg.norm(proj.imag)
    if residue > IMAG_RTOL * scale:
        raise NumericalConsistencyError(
            f"projection produced imaginary residue {residue:.3e} "
            f"(limit {IMAG_RTOL * scale:.3e})"
        )
    result = np.ascontiguousarray(proj.real).reshape(grid.ny, grid.nx, 2, 3)
    if out is not None:
        np.copyto(out, result)
        return out
    return result


def field_inner(grid, a, b):
    """Quadrature inner product sum_(pixel, e) A_e * (a : b)."""
    return grid.element_area * float(np.vdot(np.asarray(a), np.asarray(b)).real)


def is_self_adjoint_check(op, a, b):
    """Return the pair (<Ga, b>, <a, Gb>) under the quadrature inner product."""
    ga = apply(op, a)
    gb = apply(op, b)
    return field_inner(op.grid, ga, b), field_inner(op.grid, a, gb)
