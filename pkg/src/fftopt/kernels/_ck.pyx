# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled inner-loop kernels.

Same contracts as :mod:`fftopt.kernels.reference`; the hot loops run without
the GIL over flattened views.  Inputs are coerced to contiguous float64 or
complex128 buffers, so callers that pass well-shaped contiguous arrays pay no
copies.
"""

import numpy as np

BACKEND = "cython"


cdef void _mode_apply(const double complex[:, :, ::1] blocks,
                      const double complex[:, ::1] vhat,
                      double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = blocks.shape[0]
    cdef Py_ssize_t m = blocks.shape[1]
    cdef Py_ssize_t i, a, b
    cdef double complex acc
    for i in range(n):
        for a in range(m):
            acc = 0
            for b in range(m):
                acc = acc + blocks[i, a, b] * vhat[i, b]
            out[i, a] = acc


cdef void _isotropic_apply(const double[::1] lam, const double[::1] mu,
                           const double[:, ::1] field, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = field.shape[0]
    cdef Py_ssize_t i
    cdef double tr, la, two_mu
    for i in range(n):
        la = lam[i]
        two_mu = 2.0 * mu[i]
        tr = field[i, 0] + field[i, 1]
        out[i, 0] = la * tr + two_mu * field[i, 0]
        out[i, 1] = la * tr + two_mu * field[i, 1]
        out[i, 2] = two_mu * field[i, 2]


def mode_apply(blocks, vhat, out=None):
    """Per-mode matrix-vector product ``out[q] = blocks[q] @ vhat[q]``."""
    blocks = np.ascontiguousarray(blocks, dtype=np.complex128)
    vhat_c = np.ascontiguousarray(vhat, dtype=np.complex128)
    if blocks.shape[:vhat_c.ndim] != vhat_c.shape:
        raise ValueError(f"block shape {blocks.shape} does not match vector shape {vhat_c.shape}")
    # note: negative tuple indices are unsafe under wraparound=False
    m = blocks.shape[blocks.ndim - 1]
    if out is None:
        out = np.empty_like(vhat_c)
    target = out
    if not (isinstance(target, np.ndarray) and target.dtype == np.complex128
            and target.flags["C_CONTIGUOUS"] and target.shape == vhat_c.shape):
        target = np.empty_like(vhat_c)
    _mode_apply(blocks.reshape(-1, m, m), vhat_c.reshape(-1, m), target.reshape(-1, m))
    if target is not out:
        np.copyto(out, target)
    return out


def isotropic_apply(lam, mu, field, out=None):
    """Isotropic stress ``lam * tr(eps) * I + 2 * mu * eps``, pointwise."""
    field_c = np.ascontiguousarray(field, dtype=np.float64)
    lead = field_c.shape[:field_c.ndim - 1]
    if field_c.shape[field_c.ndim - 1] != 3:
        raise ValueError(f"field must have 3 components, got shape {field_c.shape}")
    lam_c = np.ascontiguousarray(np.broadcast_to(lam, lead), dtype=np.float64)
    mu_c = np.ascontiguousarray(np.broadcast_to(mu, lead), dtype=np.float64)
    if out is None:
        out = np.empty_like(field_c)
    target = out
    if not (isinstance(target, np.ndarray) and target.dtype == np.float64
            and target.flags["C_CONTIGUOUS"] and target.shape == field_c.shape):
        target = np.empty_like(field_c)
    _isotropic_apply(lam_c.reshape(-1), mu_c.reshape(-1),
                     field_c.reshape(-1, 3), target.reshape(-1, 3))
    if target is not out:
        np.copyto(out, target)
    return out
