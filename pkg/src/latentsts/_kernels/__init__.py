"""Latent-path kernels: compiled core with a pure-Python fallback.

The compiled module is preferred when present; set the environment variable
``LATENTSTS_PURE_PYTHON=1`` before import to force the fallback.  Both
implementations draw identically from the bit generator, so selection never
changes results, only speed (see benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("LATENTSTS_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

IMPLEMENTATION = _impl.IMPLEMENTATION
gaussian_ar1_path = _impl.gaussian_ar1_path
gar1_path = _impl.gar1_path

__all__ = ["IMPLEMENTATION", "gaussian_ar1_path", "gar1_path"]
