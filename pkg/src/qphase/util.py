"""Small shared helpers."""
from __future__ import annotations

import os


def thread_count() -> int:
    """Worker count for parallel sweeps, from PHASE_THREADS (default 1)."""
    raw = os.environ.get("PHASE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PHASE_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)
