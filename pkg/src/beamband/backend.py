"""Kernel backend selection.

The compiled core (``beamband._core``, Cython) is preferred; the pure-Python
twin (``beamband._core_py``) is the fallback. Set ``BEAMBAND_BACKEND=c`` or
``BEAMBAND_BACKEND=py`` to force one — forcing ``c`` on a machine without the
extension raises instead of silently degrading.

Both backends are bit-identical by construction, so which one is active only
affects speed, never results.
"""

from __future__ import annotations

import os

_requested = os.environ.get("BEAMBAND_BACKEND", "").strip().lower()
if _requested not in ("", "c", "py"):
    raise RuntimeError(f"BEAMBAND_BACKEND must be 'c' or 'py', got {_requested!r}")

if _requested == "py":
    from . import _core_py as core
else:
    try:
        from . import _core as core  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "c":
            raise
        from . import _core_py as core


def backend_name() -> str:
    """'c' when the compiled extension is active, 'python' otherwise."""
    return core.BACKEND_NAME
