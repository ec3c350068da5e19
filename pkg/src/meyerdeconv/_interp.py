"""Cubic (4-point Lagrange) table interpolation.

Exact at nodes and on cubic polynomials; for band-limited tables with
cutoff frequency w the error is O((w*step)^4) of the local amplitude,
which is what the tabulation steps in this package are chosen against.
"""

from __future__ import annotations

import numpy as np


def interp_cubic(
    values: np.ndarray,
    origin: float,
    step: float,
    x: np.ndarray,
    out_of_range: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate a real table at points x.

    Returns (results, truncated) where ``truncated`` marks points outside
    the supported range [origin + step, origin + (count-2)*step], for which
    ``out_of_range`` is returned.
    """
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    n = values.shape[0]
    pos = (x - origin) / step
    i0 = np.floor(pos).astype(np.int64)
    t = pos - i0
    ok = (i0 >= 1) & (i0 <= n - 3)
    i0c = np.clip(i0, 1, n - 3)
    tm1 = t - 1.0
    tm2 = t - 2.0
    tp1 = t + 1.0
    w_m1 = -t * tm1 * tm2 / 6.0
    w_0 = tp1 * tm1 * tm2 / 2.0
    w_p1 = -t * tp1 * tm2 / 2.0
    w_p2 = t * tp1 * tm1 / 6.0
    res = (
        w_m1 * values[i0c - 1]
        + w_0 * values[i0c]
        + w_p1 * values[i0c + 1]
        + w_p2 * values[i0c + 2]
    )
    res = np.where(ok, res, out_of_range)
    truncated = ~ok
    if scalar:
        return res[0], truncated[0]
    return res, truncated
