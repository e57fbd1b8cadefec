"""Backend selection for the time stepper.

The compiled extension is preferred when it imported cleanly; set
RABISIM_KERNEL=numpy to force the fallback, or RABISIM_KERNEL=cython to make
a missing extension a hard error instead of a silent downgrade.
"""
from __future__ import annotations

import os

from . import numpy_backend

_requested = os.environ.get("RABISIM_KERNEL", "auto").lower()

if _requested not in ("auto", "numpy", "cython"):
    raise ValueError(f"RABISIM_KERNEL must be auto|numpy|cython, got {_requested!r}")

if _requested == "numpy":
    advance = numpy_backend.advance
    BACKEND = "numpy"
else:
    try:
        from . import _core
    except ImportError:
        if _requested == "cython":
            raise
        advance = numpy_backend.advance
        BACKEND = "numpy"
    else:
        advance = _core.advance
        BACKEND = "cython"
