"""Kernel backend selection.

The compiled extension (``seplogit._speedups``) and the numpy module
(``seplogit._py_kernels``) expose the same functions; whichever is available
is chosen at import time.  Set ``SEPLOGIT_BACKEND=python`` (or ``c``) to
force one, e.g. for the kernel benchmark or parity tests.
"""

import os

from . import _py_kernels

_FORCED = os.environ.get("SEPLOGIT_BACKEND", "").strip().lower()

if _FORCED in ("python", "py"):
    _impl = _py_kernels
elif _FORCED in ("c", "compiled", "cython"):
    from . import _speedups as _impl  # hard failure is intentional here
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _py_kernels

BACKEND_NAME = _impl.BACKEND_NAME
IRLS_OK = _impl.IRLS_OK
IRLS_SINGULAR = _impl.IRLS_SINGULAR

logistic = _impl.logistic
log1p_exp = _impl.log1p_exp
loglik = _impl.loglik
score = _impl.score
fisher_info = _impl.fisher_info
irls = _impl.irls


def available_backends():
    names = ["python"]
    try:
        from . import _speedups  # noqa: F401
        names.append("c")
    except ImportError:
        pass
    return names
