"""Deconvolved atoms and the nonsymmetric kernel K*_j.

Every atom at level j is a translate of one fixed base function

    base_phi = 2^{-j/2} (phi_{j0} * eta_j),      phi~_{jk}(x) = base_phi(x - 2^-j k),

where eta_j inverts the error characteristic function over the level-j
band.  Building a level therefore costs one band-limited inversion per
base function, after which all translates are table reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._interp import interp_cubic
from ._lattice import padded_table_grid, require_estimation_grid
from .error_models import ErrorModel, char_fn, delta_j
from .exceptions import ConfigurationError
from .grids import GridFunction, UniformGrid, inverse_ft
from .meyer import (
    A,
    A_PRIME,
    MeyerBasis,
    eval_phi,
    meyer_phi_hat,
    meyer_psi_hat,
    scaled_window,
)

__all__ = [
    "DeconvAtoms",
    "ATOM_ENVELOPE_BOUND",
    "build_eta",
    "build_atoms",
    "kernel_kstar",
    "kernel_row",
    "synthesis_window_rfft",
]

# Uniform bound on delta_j * sup|base_phi|: Cauchy-Schwarz plus Plancherel
# give ||phi_{j0} * eta_j||_inf <= ||phi_{j0}||_2 ||eta_j||_2 and
# ||eta_j||_2 <= delta_j^-1 sqrt(2^j a / pi), hence the level-free bound
# sqrt(a/pi).
ATOM_ENVELOPE_BOUND = math.sqrt(A / math.pi)


@dataclass(frozen=True, eq=False)
class DeconvAtoms:
    """Per-level tabulations of the base deconvolved atoms.

    Immutable after build; hashable by identity.  ``base_phi``/``base_psi``
    live on ``table_grid`` (step = grid.step / 2^j, doubled span) so cubic
    reads keep a level-independent relative accuracy.
    """

    j: int
    model: ErrorModel
    grid: UniformGrid
    table_grid: UniformGrid
    base_phi: GridFunction
    base_psi: GridFunction
    delta_j: float
    envelope: float
    translate_radius: int
    _phi_rfft: np.ndarray = field(repr=False, default=None)
    _psi_rfft: np.ndarray = field(repr=False, default=None)

    def read_phi(self, x):
        """base_phi at arbitrary points (cubic; zero outside the table)."""
        vals, _ = interp_cubic(
            self.base_phi.values.real,
            self.table_grid.origin,
            self.table_grid.step,
            x,
        )
        return vals

    def read_psi(self, x):
        vals, _ = interp_cubic(
            self.base_psi.values.real,
            self.table_grid.origin,
            self.table_grid.step,
            x,
        )
        return vals


def _banded_spectrum(model: ErrorModel, j: int, t: np.ndarray, kind: str) -> np.ndarray:
    """2^-j W(2^-j t) / conj(F[phi_err](t)) with W the phi or psi window,
    evaluated only where the window is nonzero."""
    scale = 2.0 ** (-j)
    u = scale * t
    if kind == "phi":
        mask = np.abs(u) < 2.0 * A_PRIME  # supp F[phi] = [-4pi/3, 4pi/3]
        win = meyer_phi_hat(u[mask]).astype(np.complex128)
    else:
        mask = (np.abs(u) >= A_PRIME) & (np.abs(u) <= A)
        win = meyer_psi_hat(u[mask])
    out = np.zeros(t.shape, dtype=np.complex128)
    out[mask] = scale * win / np.conj(char_fn(model, t[mask]))
    return out


def build_eta(
    model: ErrorModel, basis: MeyerBasis, j: int, grid: UniformGrid | None = None
) -> GridFunction:
    """eta_j = F^-1[ 1_{[-2^j a, 2^j a]} / conj(F[phi_err]) ].

    The default tabulation grid spans [-64, 64) with the dual band wide
    enough for the level and at least 16 dual points per unit frequency.
    """
    delta = delta_j(model, basis, j)  # ill-posedness guard
    del delta
    if grid is None:
        step = min(2.0**-6, 0.5 * math.pi / (2.0**j * basis.a))
        step = 2.0 ** math.floor(math.log2(step))
        grid = UniformGrid.symmetric(64.0, int(round(128.0 / step)))
    dual = grid.dual()
    if -dual.origin < 2.0**j * basis.a:
        raise ConfigurationError(
            f"dual grid does not cover the level-{j} band [-2^j a, 2^j a]"
        )
    if dual.step > 1.0 / 16.0:
        raise ConfigurationError(
            "eta tabulation needs >= 16 dual points per unit frequency"
        )
    t = dual.points
    band = np.abs(t) <= 2.0**j * basis.a
    spec = np.zeros(t.shape, dtype=np.complex128)
    spec[band] = 1.0 / np.conj(char_fn(model, t[band]))
    return inverse_ft(GridFunction(dual, spec))


_ATOMS_CACHE: dict[tuple, DeconvAtoms] = {}


def build_atoms(
    model: ErrorModel,
    basis: MeyerBasis,
    grid: UniformGrid,
    j: int,
    translate_radius: int | None = None,
) -> DeconvAtoms:
    """Tabulate base_phi and base_psi for level j over ``grid``.

    One spectral product and one inversion per base function; results are
    cached per (model, grid, level).
    """
    radius = basis.translate_radius if translate_radius is None else int(translate_radius)
    key = (id(model), grid.origin, grid.step, grid.count, int(j), radius)
    hit = _ATOMS_CACHE.get(key)
    if hit is not None:
        return hit
    require_estimation_grid(grid, j)
    delta = delta_j(model, basis, j)
    table = padded_table_grid(grid, j)
    dual = table.dual()
    if -dual.origin < 2.0**j * basis.a:
        raise ConfigurationError(
            f"estimation grid too coarse for level {j}: dual range "
            f"{-dual.origin:.4g} < 2^j a = {2.0 ** j * basis.a:.4g}"
        )
    t = dual.points
    base_phi = inverse_ft(GridFunction(dual, _banded_spectrum(model, j, t, "phi")))
    base_psi = inverse_ft(GridFunction(dual, _banded_spectrum(model, j, t, "psi")))
    phi_real = base_phi.values.real
    psi_real = base_psi.values.real
    atoms = DeconvAtoms(
        j=int(j),
        model=model,
        grid=grid,
        table_grid=table,
        base_phi=base_phi,
        base_psi=base_psi,
        delta_j=delta,
        envelope=float(np.max(np.abs(phi_real))),
        translate_radius=radius,
        _phi_rfft=np.fft.rfft(phi_real),
        _psi_rfft=np.fft.rfft(psi_real),
    )
    _ATOMS_CACHE[key] = atoms
    return atoms


def synthesis_window_rfft(
    grid: UniformGrid, j: int, kind: str, radius: int
) -> tuple[UniformGrid, np.ndarray]:
    """rfft of the truncated synthesis window W(u) = phi/psi(2^j u) on the
    coarse padded grid matching ``grid``."""
    require_estimation_grid(grid, j)
    span = max(2.0 * grid.span, 128.0)
    synth = UniformGrid.symmetric(span / 2.0, int(round(span / grid.step)))
    table = scaled_window(synth, j, kind, truncate_radius=radius)
    return synth, np.fft.rfft(table.values.real)


def kernel_kstar(atoms: DeconvAtoms, basis: MeyerBasis, x: float, y: float) -> float:
    """K*_j(x, y) = 2^j sum_k phi(2^j x - k) phi~_{jk}(y), with the k-sum
    truncated to the translate radius around round(2^j x) and round(2^j y)."""
    j = atoms.j
    r = atoms.translate_radius
    two_j = 2.0**j
    cx = int(round(two_j * x))
    cy = int(round(two_j * y))
    ks = np.union1d(
        np.arange(cx - r, cx + r + 1), np.arange(cy - r, cy + r + 1)
    )
    phi_vals = eval_phi(basis, two_j * x - ks)
    atom_vals = atoms.read_phi(y - ks / two_j)
    return float(two_j * np.sum(phi_vals * atom_vals))


def kernel_row(atoms: DeconvAtoms, basis: MeyerBasis, x: float) -> np.ndarray:
    """K*_j(x, y) on the estimation grid (k truncated around round(2^j x))."""
    j = atoms.j
    r = atoms.translate_radius
    two_j = 2.0**j
    cx = int(round(two_j * x))
    ks = np.arange(cx - r, cx + r + 1)
    phi_vals = eval_phi(basis, two_j * x - ks)
    y = atoms.grid.points
    pos = y[None, :] - ks[:, None] / two_j
    atom_vals = atoms.read_phi(pos.ravel()).reshape(pos.shape)
    return two_j * np.einsum("k,ky->y", phi_vals, atom_vals)
