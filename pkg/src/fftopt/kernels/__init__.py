"""Inner-loop kernels with a compiled fast path and a numpy fallback.

The compiled extension is used when it imported cleanly; set the environment
variable ``FFTOPT_PURE_PYTHON=1`` before import to force the numpy reference
implementation.  Both backends satisfy identical contracts, see
:mod:`fftopt.kernels.reference`.
"""

import os

from . import reference


def _select_backend():
    flag = os.environ.get("FFTOPT_PURE_PYTHON", "").strip().lower()
    if flag in {"1", "true", "yes", "on"}:
        return reference
    try:
        from . import _ck
    except ImportError:
        return reference
    return _ck


_impl = _select_backend()

BACKEND = _impl.BACKEND
mode_apply = _impl.mode_apply
isotropic_apply = _impl.isotropic_apply

__all__ = ["BACKEND", "mode_apply", "isotropic_apply", "reference"]
