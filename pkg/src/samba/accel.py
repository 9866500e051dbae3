"""Numba acceleration toggle.

Hot kernels ship as twins: a numba ``@njit`` implementation and a pure-numpy
one. The numba path is active when numba imports cleanly and the
``SAMBA_NO_NUMBA`` environment variable is unset (or 0/false). Both twins of
every kernel stay importable so the benchmark and the twin-equality tests can
compare them directly; ``pick()`` just selects the live one at import time.
"""

import os

DISABLE_ENV = "SAMBA_NO_NUMBA"


def _env_disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


# Pin the threading layer before numba probes TBB (old TBB emits a warning).
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via SAMBA_NO_NUMBA instead
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def pick(jit_impl, numpy_impl):
    """Return the active implementation for a kernel twin pair."""
    if USE_NUMBA and jit_impl is not None:
        return jit_impl
    return numpy_impl
