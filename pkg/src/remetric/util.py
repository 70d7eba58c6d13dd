"""Small shared helpers: formatting, worker count, audit grids."""

import os

import numpy as np


def worker_count() -> int:
    """Worker cap for parallelizable scans, from REMETRIC_THREADS (default 1)."""
    raw = os.environ.get("REMETRIC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def fmt12(x) -> str:
    """Fixed 12-significant-digit formatting for report tables."""
    return f"{float(x):.12g}"


def fmt_exact(x) -> str:
    """Shortest decimal that round-trips to the same float (matrix payloads)."""
    return repr(float(x))


def geometric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Strictly positive geometric grid with n points from lo to hi."""
    if not (0.0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    if n < 2:
        raise ValueError("need at least two grid points")
    return np.geomspace(lo, hi, n)
