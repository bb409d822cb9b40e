"""Backend selection: numba-jitted kernels with a pure-numpy escape hatch.

Setting the environment variable CONDGRAD_DISABLE_NUMBA to anything other
than "" or "0" (before import) disables compilation and routes every caller
to the vectorized numpy fallbacks. The same happens automatically when numba
is not importable.
"""

import os

_flag = os.environ.get("CONDGRAD_DISABLE_NUMBA", "").strip()
NUMBA_DISABLED = _flag not in ("", "0")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by CONDGRAD_DISABLE_NUMBA")
    from numba import njit  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # .. mimic the decorator so kernel modules import unchanged ..
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
