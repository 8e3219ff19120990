"""Pure-numpy fallback for the compiled stepping kernel.

Must mirror ``_kernels.pyx`` operation for operation (same expression, same
evaluation order); the two backends are allowed to differ only by the
reduction order of the per-step ensemble mean, which keeps them within a
few ulps of each other.
"""

import numpy as np


def step_network_batch(x0, a, dt, drive):
    """Advance a batch of reserve paths; see ``_kernels.step_network_batch``."""
    drive = np.asarray(drive, dtype=np.float64)
    if drive.ndim != 3:
        raise ValueError("drive must have shape (B, steps, M)")
    B, steps, M = drive.shape
    x0 = np.asarray(x0, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if x0.shape != (M,) or a.shape != (M,):
        raise ValueError("x0/a length does not match drive's bank axis")

    out = np.empty((B, steps + 1, M), dtype=np.float64)
    adt = a * dt
    x = np.broadcast_to(x0, (B, M)).copy()
    out[:, 0, :] = x
    for k in range(steps):
        xbar = x.mean(axis=1, keepdims=True)
        x = x + adt * (xbar - x) + drive[:, k, :]
        out[:, k + 1, :] = x
    return out
