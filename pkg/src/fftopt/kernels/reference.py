"""Pure-numpy reference implementations of the inner-loop kernels.

These are the fallback backend when the compiled extension is unavailable and
the ground truth it is tested against.  Shapes follow the field conventions of
the package: per-mode blocks ``(ny, nx, 6, 6)`` complex, spectral fields
``(ny, nx, 6)`` complex, quadrature fields ``(ny, nx, 2, 3)`` real with
per-element coefficient arrays ``(ny, nx, 2)``.
"""

import numpy as np

BACKEND = "numpy"


def mode_apply(blocks, vhat, out=None):
    """Per-mode matrix-vector product ``out[q] = blocks[q] @ vhat[q]``."""
    if out is None:
        out = np.empty_like(vhat)
    np.einsum("...ab,...b->...a", blocks, vhat, out=out)
    return out


def isotropic_apply(lam, mu, field, out=None):
    """Isotropic stress of a strain field in the orthonormal component basis.

    ``sigma = lam * tr(eps) * I + 2 * mu * eps`` evaluated pointwise; ``lam``
    and ``mu`` broadcast against the leading axes of ``field``.
    """
    field = np.asarray(field)
    if out is None:
        out = np.empty_like(field)
    lam = np.asarray(lam)[..., None]
    two_mu = 2.0 * np.asarray(mu)[..., None]
    trace = field[..., :1] + field[..., 1:2]
    np.multiply(two_mu, field, out=out)
    out[..., :2] += lam * trace
    return out
