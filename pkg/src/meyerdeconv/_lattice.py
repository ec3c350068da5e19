"""Shared FFT machinery for translate sums on dyadic lattices.

Everything the estimators do reduces to two primitives on power-of-two
grids whose steps are exact dyadic rationals:

  * correlate sample (or quadrature) weights against a tabulated base
    function and read the result on the translate lattice u_k = 2^-j k;
  * synthesize sum_k c_k W(x - u_k) on the output grid.

Because 2^-j k is an exact multiple of the table step, both reduce to one
FFT pair each and agree with the direct translate sums to rounding.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConfigurationError
from .grids import UniformGrid

__all__ = [
    "dyadic_log2_step",
    "require_estimation_grid",
    "padded_table_grid",
    "scatter_cubic",
    "correlate_field",
    "lattice_read",
    "synthesize",
]

_MIN_PAD_SPAN = 128.0  # keeps >= 16 dual points per unit frequency


def dyadic_log2_step(grid: UniformGrid) -> int:
    """m such that grid.step == 2^-m exactly; error if no such integer."""
    m = -math.log2(grid.step)
    if abs(m - round(m)) > 1e-9 or grid.step != 2.0 ** (-round(m)):
        raise ConfigurationError(
            f"estimation grids need an exact dyadic step 2^-m, got {grid.step!r}"
        )
    return int(round(m))


def require_estimation_grid(grid: UniformGrid, j: int) -> int:
    """Validate grid/level compatibility; returns m with step = 2^-m."""
    if not grid.is_symmetric():
        raise ConfigurationError("estimation grid must be symmetric about 0")
    m = dyadic_log2_step(grid)
    if j < 0 or j > m:
        raise ConfigurationError(
            f"level {j} not representable on a grid with step 2^-{m}"
        )
    return m


def padded_table_grid(grid: UniformGrid, j: int) -> UniformGrid:
    """Fine grid for level-j base-function tables: step = grid.step/2^j,
    span = max(2 * grid.span, 128) so correlations never wrap into the
    read region and eta is resolved to >= 16 points per unit frequency."""
    require_estimation_grid(grid, j)
    span = max(2.0 * grid.span, _MIN_PAD_SPAN)
    step = grid.step / 2.0**j
    count = int(round(span / step))
    return UniformGrid.symmetric(span / 2.0, count)


def scatter_cubic(
    samples: np.ndarray,
    table_grid: UniformGrid,
    window_lo: float,
    window_hi: float,
    sample_weights: np.ndarray | None = None,
) -> tuple[np.ndarray, int, int]:
    """Scatter 4-point cubic interpolation weights of each sample onto the
    table grid.  Samples outside [window_lo, window_hi) are dropped and
    counted.  Returns (weights, n_used, n_dropped)."""
    samples = np.asarray(samples, dtype=np.float64)
    keep = (samples >= window_lo) & (samples < window_hi)
    dropped = int(samples.size - np.count_nonzero(keep))
    pts = samples[keep]
    if sample_weights is not None:
        sw = np.asarray(sample_weights, dtype=np.float64)[keep]
    else:
        sw = None
    out = np.zeros(table_grid.count)
    if pts.size == 0:
        return out, 0, dropped
    pos = (pts - table_grid.origin) / table_grid.step
    i0 = np.floor(pos).astype(np.int64)
    t = pos - i0
    tm1 = t - 1.0
    tm2 = t - 2.0
    tp1 = t + 1.0
    w = np.empty((4, pts.size))
    w[0] = -t * tm1 * tm2 / 6.0
    w[1] = tp1 * tm1 * tm2 / 2.0
    w[2] = -t * tp1 * tm2 / 2.0
    w[3] = t * tp1 * tm1 / 6.0
    if sw is not None:
        w *= sw[None, :]
    idx = np.concatenate([i0 - 1, i0, i0 + 1, i0 + 2])
    if idx.min() < 0 or idx.max() >= table_grid.count:
        raise ConfigurationError("sample window exceeds the padded table grid")
    out += np.bincount(idx, weights=w.ravel(), minlength=table_grid.count)
    return out, int(pts.size), dropped


def correlate_field(weights: np.ndarray, table_rfft: np.ndarray, count: int) -> np.ndarray:
    """C[m] = sum_i weights[i] * table[i - m] via one rfft pair."""
    return np.fft.irfft(np.fft.rfft(weights) * np.conj(table_rfft), count)


def lattice_read(field: np.ndarray, k_max: int, stride: int) -> np.ndarray:
    """field values at lattice shifts m = k*stride for k = -k_max..k_max."""
    ks = np.arange(-k_max, k_max + 1)
    return field[(ks * stride) % field.shape[0]]


def synthesize(
    coeffs: np.ndarray,
    k_max: int,
    grid: UniformGrid,
    synth_grid: UniformGrid,
    j: int,
    window_rfft: np.ndarray,
    scale: float,
) -> np.ndarray:
    """scale * sum_k coeffs[k] W(x_i - 2^-j k) on the estimation grid."""
    m = dyadic_log2_step(grid)
    count = synth_grid.count
    ks = np.arange(-k_max, k_max + 1)
    idx = (ks * (2 ** (m - j)) + count // 2) % count
    d = np.zeros(count)
    np.add.at(d, idx, coeffs)
    conv = np.fft.irfft(np.fft.rfft(d) * window_rfft, count)
    offset0 = int(round((grid.origin - synth_grid.origin) / grid.step))
    read = (np.arange(grid.count) + offset0 + count // 2) % count
    return scale * conv[read]
