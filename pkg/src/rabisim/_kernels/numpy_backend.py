"""Pure-numpy time stepper, used when the compiled core is unavailable."""
from __future__ import annotations

import numpy as np


def advance(rho: np.ndarray, coh: np.ndarray, pop: np.ndarray, steps: int) -> None:
    """Apply `steps` fixed-step updates in place.

    coh is the per-step factor for every off-diagonal element (its diagonal
    must be zero); pop is the per-step population transfer matrix applied to
    the diagonal.  One step is: save diag, scale elementwise, refill diag.
    """
    d = rho.shape[0]
    idx = np.arange(d)
    for _ in range(int(steps)):
        p = rho[idx, idx].copy()
        rho *= coh
        rho[idx, idx] = pop @ p
