"""Backend selection for the hot numerical kernels.

The compiled extension ``_core`` is used when it can be imported; otherwise
the numpy implementation in ``_pure`` takes over. Setting the environment
variable ``VDWBODY_PURE=1`` forces the fallback.
"""
import os

from . import _pure

pure = _pure

if os.environ.get("VDWBODY_PURE", "") == "1":
    _backend = _pure
    BACKEND = "python"
    compiled = None
else:
    try:
        from . import _core as _backend
        BACKEND = "cython"
        compiled = _backend
    except ImportError:  # extension not built
        _backend = _pure
        BACKEND = "python"
        compiled = None

bessel_j012 = _backend.bessel_j012
reflection = _backend.reflection
scattering_u2g = _backend.scattering_u2g

KIND_REGULAR = _pure.KIND_REGULAR
KIND_CONDUCTOR = _pure.KIND_CONDUCTOR
KIND_PERMEABLE = _pure.KIND_PERMEABLE

__all__ = ["BACKEND", "bessel_j012", "reflection", "scattering_u2g", "pure", "compiled",
           "KIND_REGULAR", "KIND_CONDUCTOR", "KIND_PERMEABLE"]
