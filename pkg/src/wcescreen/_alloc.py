"""glibc allocator tuning for the per-frame loop.

Every frame allocates a few arrays of about 1 MB. Under glibc's default
thresholds each one is a fresh ``mmap`` with page faults on first touch, which
shows up as system time comparable to the useful work. Raising the mmap and
trim thresholds lets freed blocks be reused from the heap instead.
"""

import ctypes
import ctypes.util

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3
_THRESHOLD = 64 << 20

_done = False


def tune_allocator() -> bool:
    """Apply once per process; returns False where glibc is unavailable."""
    global _done
    if _done:
        return True
    try:
        libc = ctypes.CDLL(ctypes.util.find_library("c") or "libc.so.6")
        mallopt = libc.mallopt
    except (OSError, AttributeError):
        return False
    ok = mallopt(_M_MMAP_THRESHOLD, _THRESHOLD) == 1 and mallopt(_M_TRIM_THRESHOLD, 2 * _THRESHOLD) == 1
    _done = ok
    return ok
