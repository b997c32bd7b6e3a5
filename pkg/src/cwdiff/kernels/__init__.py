"""Hot-loop kernels with backend selection at import time.

The compiled Cython backend (``cwdiff.kernels._native``) is preferred; the
numpy fallback is used when the extension is missing or when the
CWDIFF_PURE_PYTHON environment variable is set to a non-empty value.
"""

import os

from . import _numpy

if os.environ.get("CWDIFF_PURE_PYTHON"):
    _impl = _numpy
    BACKEND = "python"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _numpy
        BACKEND = "python"

complex_coo_matmat = _impl.complex_coo_matmat
real_coo_matmat = _impl.real_coo_matmat
edge_degrees = _impl.edge_degrees
edge_degrees_backward = _impl.edge_degrees_backward
propagate_forward = _impl.propagate_forward
propagate_backward = _impl.propagate_backward


def available_backends():
    """Name -> module map of importable backends (for tests and benchmarks)."""
    backends = {"python": _numpy}
    try:
        from . import _native

        backends["native"] = _native
    except ImportError:
        pass
    return backends
