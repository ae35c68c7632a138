"""Hot numerical kernels with backend selection at import time.

The compiled Cython extension (``_native``) is preferred; the pure-Python
module (``_pure``) implements the same functions and is used when the
extension is unavailable or when the environment variable ``MORBIT_PURE``
is set to a non-empty value.  ``BACKEND`` records which one is active.
"""

import os

if os.environ.get("MORBIT_PURE"):
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure"

flow_rk4 = _impl.flow_rk4
flow_rk4_var = _impl.flow_rk4_var
monodromy_rk4 = _impl.monodromy_rk4
neg_count_twisted = _impl.neg_count_twisted

__all__ = [
    "BACKEND",
    "flow_rk4",
    "flow_rk4_var",
    "monodromy_rk4",
    "neg_count_twisted",
]
