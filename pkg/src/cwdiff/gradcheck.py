"""Central-difference gradient verification.

Independent of the tape: the checked function is re-evaluated with entry-wise
parameter perturbations, so agreement certifies the recorded backward rules.
"""

import numpy as np


def central_difference(fn, params, step=1e-5):
    """Numeric gradients of ``fn(params) -> float`` for every array entry."""
    grads = {}
    for name, value in params.items():
        g = np.zeros_like(value)
        flat = value.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            saved = flat[k]
            flat[k] = saved + step
            hi = fn(params)
            flat[k] = saved - step
            lo = fn(params)
            flat[k] = saved
            gflat[k] = (hi - lo) / (2.0 * step)
        grads[name] = g
    return grads


def max_relative_error(analytic, numeric, floor=1e-8):
    """Largest elementwise relative error where either gradient is non-tiny."""
    worst = 0.0
    for name, a in analytic.items():
        b = numeric[name]
        denom = np.abs(a) + np.abs(b)
        mask = denom > floor
        if mask.any():
            err = np.abs(a - b)[mask] / denom[mask]
            worst = max(worst, float(err.max()))
    return worst
