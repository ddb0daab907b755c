"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
versions are used. Setting ``PSIDO_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("PSIDO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

phase_sum = _impl.phase_sum
pv_hilbert = _impl.pv_hilbert
unwrap_phase_total = _impl.unwrap_phase_total

__all__ = ["BACKEND", "phase_sum", "pv_hilbert", "unwrap_phase_total"]
