"""Optional numba acceleration.

Set ``CBM_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
Without numba installed the fallback is used automatically.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional speedup
    numba = None

_DISABLED = os.environ.get("CBM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

NUMBA_ENABLED = numba is not None and not _DISABLED


def jit_or_python(func):
    """Return ``(selected, jitted)`` for a kernel.

    ``jitted`` is ``None`` when numba is unavailable.  ``selected`` honours the
    environment flag.
    """
    jitted = numba.njit(cache=True, nogil=True)(func) if numba is not None else None
    selected = jitted if NUMBA_ENABLED else func
    return selected, jitted
