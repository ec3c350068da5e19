"""Error (noise) laws: characteristic functions, decay classification,
band minima, and samplers.

The characteristic function F[phi] is the only thing deconvolution needs
analytically; ``delta_j`` is its minimum modulus over the level-j band
[-2^j a, 2^j a] and quantifies the noise amplification of the method.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._interp import interp_cubic
from ._rng import derive_rng
from .exceptions import (
    CapabilityError,
    ConfigurationError,
    IllPosednessError,
    ParseError,
    TabulationRangeError,
)

__all__ = [
    "Regime",
    "DecayClass",
    "ErrorModel",
    "dirac",
    "gaussian",
    "laplace",
    "cauchy",
    "custom",
    "custom_from_csv",
    "char_fn",
    "delta_j",
    "sample_noise",
]

DELTA_FLOOR = 1e-300


class Regime(enum.Enum):
    NONE = "none"
    MODERATE = "moderately_ill_posed"
    SEVERE = "severely_ill_posed"


@dataclass(frozen=True)
class DecayClass:
    """Lower envelope |F[phi](t)| >= C (1+t^2)^(-w/2) exp(-c0 |t|^alpha).

    c0 = 0 marks the moderately ill-posed (polynomial) regime, c0 > 0 the
    severely ill-posed one.
    """

    C: float
    w: float
    c0: float
    alpha: float
    regime: Regime

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ConfigurationError("decay constant C must be positive")
        if self.c0 < 0:
            raise ConfigurationError("c0 must be nonnegative")
        if self.c0 > 0 and not self.alpha > 0:
            raise ConfigurationError("alpha must be positive when c0 > 0")
        expected = Regime.NONE if self.c0 == 0 and self.w == 0 else (
            Regime.MODERATE if self.c0 == 0 else Regime.SEVERE
        )
        if self.regime is Regime.NONE and expected is not Regime.NONE:
            raise ConfigurationError("regime 'none' requires w = c0 = 0")

    def envelope(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = self.C * (1.0 + t**2) ** (-self.w / 2.0)
        if self.c0 > 0:
            out = out * np.exp(-self.c0 * np.abs(t) ** self.alpha)
        return out


@dataclass(frozen=True, eq=False)
class ErrorModel:
    """Known error law.  Instances are immutable and hashed by identity,
    which lets them key caches of per-level deconvolution tables."""

    kind: str
    params: tuple[float, ...]
    decay: DecayClass
    table_t: np.ndarray | None = None
    table_ft: np.ndarray | None = None
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    j_max: int | None = None

    def char_fn(self, t) -> np.ndarray:
        return char_fn(self, t)

    def modulus_radially_nonincreasing(self) -> bool:
        return self.kind in ("dirac", "gaussian", "laplace", "cauchy")

    def describe(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(f"{p:g}" for p in self.params)


def _check_envelope(model: ErrorModel, t_max: float) -> None:
    t = np.linspace(0.0, t_max, 4097)
    mod = np.abs(char_fn(model, t))
    env = model.decay.envelope(t)
    if np.any(mod < env * (1.0 - 1e-9) - 1e-305):
        bad = t[mod < env * (1.0 - 1e-9) - 1e-305][0]
        raise ConfigurationError(
            f"declared decay envelope fails at t = {bad:.6g} for {model.describe()}"
        )


def dirac() -> ErrorModel:
    model = ErrorModel(
        kind="dirac",
        params=(),
        decay=DecayClass(C=1.0, w=0.0, c0=0.0, alpha=1.0, regime=Regime.NONE),
        sampler=lambda rng, n: np.zeros(n),
    )
    return model


def gaussian(sigma: float) -> ErrorModel:
    if not sigma > 0:
        raise ConfigurationError("gaussian sigma must be positive")
    model = ErrorModel(
        kind="gaussian",
        params=(float(sigma),),
        decay=DecayClass(
            C=1.0, w=0.0, c0=sigma**2 / 2.0, alpha=2.0, regime=Regime.SEVERE
        ),
        sampler=lambda rng, n: rng.normal(0.0, sigma, size=n),
    )
    _check_envelope(model, 64.0)
    return model


def laplace(b: float) -> ErrorModel:
    if not b > 0:
        raise ConfigurationError("laplace scale b must be positive")
    model = ErrorModel(
        kind="laplace",
        params=(float(b),),
        decay=DecayClass(
            C=1.0 / max(1.0, b**2), w=2.0, c0=0.0, alpha=1.0, regime=Regime.MODERATE
        ),
        sampler=lambda rng, n: rng.laplace(0.0, b, size=n),
    )
    _check_envelope(model, 1e4)
    return model


def cauchy(gamma: float) -> ErrorModel:
    if not gamma > 0:
        raise ConfigurationError("cauchy scale gamma must be positive")
    model = ErrorModel(
        kind="cauchy",
        params=(float(gamma),),
        decay=DecayClass(C=1.0, w=0.0, c0=float(gamma), alpha=1.0, regime=Regime.SEVERE),
        # inverse-CDF draw keeps the stream reproducible across platforms
        sampler=lambda rng, n: gamma * np.tan(np.pi * (rng.random(n) - 0.5)),
    )
    _check_envelope(model, 512.0)
    return model


def custom(
    t: np.ndarray,
    ft: np.ndarray,
    decay: DecayClass,
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
    j_max: int = 4,
) -> ErrorModel:
    """Tabulated characteristic function.

    The tabulation must be on a strictly increasing, symmetric range that
    covers [-2^j_max a, 2^j_max a], so the ill-posedness guard can be
    checked eagerly for every level up to j_max.
    """
    from .meyer import A  # local import to avoid a cycle

    t = np.asarray(t, dtype=np.float64)
    ft = np.asarray(ft, dtype=np.complex128)
    if t.ndim != 1 or t.shape != ft.shape:
        raise ConfigurationError("custom model needs matching 1-d t and F[phi] arrays")
    if np.any(np.diff(t) <= 0):
        raise ConfigurationError("custom model abscissae must be strictly increasing")
    if abs(t[0] + t[-1]) > 1e-9 * max(1.0, abs(t[-1])):
        raise ConfigurationError("custom model range must be symmetric")
    if t[-1] < 2.0**j_max * A:
        raise ConfigurationError(
            f"custom tabulation must reach 2^{j_max} a = {2.0 ** j_max * A:.6g}"
        )
    i0 = int(np.argmin(np.abs(t)))
    if abs(ft[i0] - 1.0) > 1e-6:
        raise ConfigurationError("characteristic function must satisfy F[phi](0) = 1")
    if np.max(np.abs(ft)) > 1.0 + 1e-9:
        raise ConfigurationError("|F[phi]| must not exceed 1")
    model = ErrorModel(
        kind="custom",
        params=(),
        decay=decay,
        table_t=t,
        table_ft=ft,
        sampler=sampler,
        j_max=int(j_max),
    )
    _check_envelope(model, float(t[-1]))
    return model


def custom_from_csv(path, decay: DecayClass, j_max: int = 4) -> ErrorModel:
    """Custom model from CSV rows (t, re F[phi], im F[phi])."""
    import csv

    ts: list[float] = []
    res: list[float] = []
    ims: list[float] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                float(row[0])
            except ValueError:
                if lineno == 1:
                    continue
                raise ParseError("non-numeric abscissa", line=lineno)
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
            try:
                ts.append(float(row[0]))
                res.append(float(row[1]))
                ims.append(float(row[2]))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return custom(
        np.asarray(ts), np.asarray(res) + 1j * np.asarray(ims), decay, j_max=j_max
    )


def char_fn(model: ErrorModel, t) -> np.ndarray:
    """F[phi](t); closed forms for the built-ins, interpolation for custom."""
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if model.kind == "dirac":
        out = np.ones(t.shape, dtype=np.complex128)
    elif model.kind == "gaussian":
        (sigma,) = model.params
        out = np.exp(-(sigma**2) * t**2 / 2.0).astype(np.complex128)
    elif model.kind == "laplace":
        (b,) = model.params
        out = (1.0 / (1.0 + b**2 * t**2)).astype(np.complex128)
    elif model.kind == "cauchy":
        (gamma,) = model.params
        out = np.exp(-gamma * np.abs(t)).astype(np.complex128)
    elif model.kind == "custom":
        lo, hi = model.table_t[0], model.table_t[-1]
        if np.any((t < lo) | (t > hi)):
            raise TabulationRangeError(
                f"custom model evaluated outside tabulation [{lo:g}, {hi:g}]"
            )
        step = model.table_t[1] - model.table_t[0]
        re, _ = interp_cubic(model.table_ft.real, lo, step, t)
        im, _ = interp_cubic(model.table_ft.imag, lo, step, t)
        out = re + 1j * im
    else:
        raise ConfigurationError(f"unknown error model kind {model.kind!r}")
    return out[0] if scalar else out


def _golden_refine(fn, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = (a + b) / 2.0
    return x, fn(x)


def delta_j(model: ErrorModel, basis, j: int) -> float:
    """min over [-2^j a, 2^j a] of |F[phi]| (the amplification constant).

    Closed-form endpoint evaluation for the built-ins (even, radially
    nonincreasing modulus); grid minimization refined by golden section
    for custom models.  Raises IllPosednessError when the minimum is a
    numerical zero, naming the offending frequency.
    """
    if j < 0:
        raise ConfigurationError("level j must be nonnegative")
    band = 2.0**j * basis.a
    if model.kind == "custom":
        if model.j_max is not None and j > model.j_max:
            raise TabulationRangeError(
                f"custom model tabulated only out to j_max = {model.j_max}"
            )
        t = model.table_t
        mask = np.abs(t) <= band
        mods = np.abs(model.table_ft[mask])
        i_min = int(np.argmin(mods))
        t_near = t[mask][i_min]
        step = t[1] - t[0]
        lo = max(-band, t_near - step)
        hi = min(band, t_near + step)
        t_min, value = _golden_refine(lambda u: abs(char_fn(model, u)), lo, hi)
        if mods[i_min] < value:
            t_min, value = t_near, float(mods[i_min])
    else:
        t_min = band
        value = float(abs(char_fn(model, band)))
    if value < DELTA_FLOOR or value == 0.0:
        raise IllPosednessError(
            f"|F[phi]| = {value:.3g} at t = {t_min:.6g} is numerically zero on "
            f"the level-{j} band; deconvolution at this level is ill posed",
            t=float(t_min),
            value=value,
        )
    return value


def sample_noise(model: ErrorModel, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from the error law; reproducible given (model, seed)."""
    if n < 1:
        raise ConfigurationError("need n >= 1")
    if model.sampler is None:
        raise CapabilityError(
            f"{model.describe()} has no sampler; supply one at construction"
        )
    return np.asarray(model.sampler(derive_rng(seed), int(n)), dtype=np.float64)
