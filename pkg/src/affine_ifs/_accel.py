"""Switch between numba-compiled kernels and the pure-numpy fallbacks.

Set ``AFFINE_IFS_USE_NUMBA=0`` before import to force the numpy path.
If numba cannot be imported the numpy path is used regardless.
"""

import os

_flag = os.environ.get("AFFINE_IFS_USE_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off", "")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = _requested and HAVE_NUMBA


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator.

    The decorated function is still defined without numba so the kernels
    module can be imported (and the numpy path used) on minimal installs.
    """
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]):
        return args[0]
    return lambda f: f
