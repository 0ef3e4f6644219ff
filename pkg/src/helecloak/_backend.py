"""Import-time selection of the kernel backend.

The compiled Cython core is preferred when present; otherwise the NumPy
fallback is used.  Set HELECLOAK_BACKEND=python or =cython to force a
choice (forcing cython raises if the extension is missing, rather than
silently degrading).
"""

import os

_requested = os.environ.get("HELECLOAK_BACKEND", "").strip().lower()

if _requested not in ("", "cython", "python"):
    raise ImportError(f"HELECLOAK_BACKEND must be 'cython' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _core_py as core

    BACKEND = "python"
else:
    try:
        from . import _core_cy as core  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError("HELECLOAK_BACKEND=cython but the compiled extension is unavailable")
        from . import _core_py as core

        BACKEND = "python"


def worker_count() -> int:
    """Worker cap for chunked evaluation, from HELECLOAK_THREADS (default 1)."""
    raw = os.environ.get("HELECLOAK_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HELECLOAK_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"HELECLOAK_THREADS must be >= 1, got {n}")
    return n
