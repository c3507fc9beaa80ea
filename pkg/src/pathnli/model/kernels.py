"""Backend selection for the LSTM kernels.

The compiled extension is preferred when it imported cleanly; the numpy
reference is the fallback. Set PATHNLI_BACKEND=python or
PATHNLI_BACKEND=cython to force one (forcing cython raises if the
extension is unavailable). The active choice is exposed as BACKEND.
"""

from __future__ import annotations

import os

from ..errors import ModelError
from . import _lstm_py

_forced = os.environ.get("PATHNLI_BACKEND", "").strip().lower()
if _forced and _forced not in ("python", "cython"):
    raise ModelError(
        f"PATHNLI_BACKEND must be 'python' or 'cython', got {_forced!r}")

if _forced == "python":
    _impl = _lstm_py
    BACKEND = "python"
else:
    try:
        from . import _lstm_cy as _impl
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise ModelError(
                "PATHNLI_BACKEND=cython but the compiled extension is not "
                "available; reinstall with a C compiler present") from None
        _impl = _lstm_py
        BACKEND = "python"

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward


def get_backends() -> dict[str, object]:
    """Every importable kernel module, keyed by backend name."""
    out = {"python": _lstm_py}
    try:
        from . import _lstm_cy
        out["cython"] = _lstm_cy
    except ImportError:
        pass
    return out
