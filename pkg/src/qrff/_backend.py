"""Selects the quantizer loop implementation at import time.

The compiled extension (``qrff._native``) is preferred; the pure-Python
fallback is used when it is missing. Set ``QRFF_BACKEND=python`` to force the
fallback or ``QRFF_BACKEND=native`` to fail loudly if the extension is absent.
"""

from __future__ import annotations

import os

from . import _fallback

_requested = os.environ.get("QRFF_BACKEND", "auto")
if _requested not in ("auto", "native", "python"):
    raise ValueError(f"QRFF_BACKEND must be auto, native or python, got {_requested!r}")

if _requested == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        _impl = _fallback
        BACKEND = "python"

sd1 = _impl.sd1
sd_filtered = _impl.sd_filtered
beta_run = _impl.beta_run


def backend_name() -> str:
    """Name of the active quantizer backend ("native" or "python")."""
    return BACKEND
