"""Kernel backend selection.

The compiled Cython kernels are preferred when importable; otherwise the
pure-numpy fallback is used.  Set ``HOLOSIM_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking and for testing backend equivalence).
"""
from __future__ import annotations

import os

if os.environ.get("HOLOSIM_PURE_PYTHON"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return kernels.BACKEND_NAME
