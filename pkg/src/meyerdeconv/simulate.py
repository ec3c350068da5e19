"""Test densities, synthetic sampling, and the Monte Carlo harness:
sup-norm risk ladders, coverage experiments, the supersmooth bias check,
and log-log rate fitting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats as sps
from scipy.interpolate import BSpline

from ._rng import derive_rng
from .atoms import build_atoms
from .confidence import build_band, rademacher_sup, sigma_r
from .error_models import ErrorModel, sample_noise
from .estimators import (
    DEFAULT_KAPPA_PRIME,
    ResolutionRule,
    ThresholdConfig,
    estimate_G,
    expected_estimate,
    linear_estimate,
    pilot_density_sup,
    project_density,
    select_resolution,
    threshold_estimate,
)
from .exceptions import ConfigurationError, InsufficiencyError
from .grids import GridFunction, UniformGrid, convolve_density, trapezoid_weights
from .meyer import BesovSpec, MeyerBasis, besov_norm, eval_psi, min_translate_spacing

__all__ = [
    "TestDensity",
    "SupersmoothSpec",
    "gaussian_density",
    "gaussian_mixture",
    "scaled_cauchy",
    "uniform_sum",
    "cauchy_plus_bump",
    "certify_supersmooth",
    "sample_xy",
    "lower_bound_family",
    "EstimatorConfig",
    "RiskReport",
    "CoverageReport",
    "BandConfig",
    "sup_norm_risk",
    "coverage_experiment",
    "bias_check",
    "rate_fit",
]


@dataclass(frozen=True)
class SupersmoothSpec:
    """Membership certificate in the class with spectral weight
    exp(2 c0_tilde |t|^s): integral |F f|^2 e^{2 c0 |t|^s} dt <= 2 pi L."""

    c0_tilde: float
    s: float
    L: float


@dataclass(frozen=True, eq=False)
class TestDensity:
    name: str
    pdf: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    char_fn: Callable[[np.ndarray], np.ndarray] | None = None
    besov: BesovSpec | None = None
    supersmooth: SupersmoothSpec | None = None

    def tabulate(self, grid: UniformGrid) -> GridFunction:
        return GridFunction(grid, self.pdf(grid.points).astype(np.complex128))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.sampler(rng, n), dtype=np.float64)


def gaussian_density(mu: float, sigma: float, **extra) -> TestDensity:
    if not sigma > 0:
        raise ConfigurationError("sigma must be positive")
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    return TestDensity(
        name=f"gaussian({mu:g},{sigma:g})",
        pdf=lambda x: norm * np.exp(-((np.asarray(x) - mu) ** 2) / (2.0 * sigma**2)),
        sampler=lambda rng, n: rng.normal(mu, sigma, size=n),
        char_fn=lambda t: np.exp(-(sigma**2) * np.asarray(t) ** 2 / 2.0)
        * np.exp(-1j * mu * np.asarray(t)),
        **extra,
    )


def gaussian_mixture(weights, mus, sigmas, **extra) -> TestDensity:
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ConfigurationError("mixture weights must be positive and sum to 1")
    mus = np.asarray(mus, dtype=np.float64)
    sigmas = np.asarray(sigmas, dtype=np.float64)

    def pdf(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for wi, mi, si in zip(w, mus, sigmas):
            out += wi * np.exp(-((x - mi) ** 2) / (2 * si**2)) / (si * math.sqrt(2 * math.pi))
        return out

    def sampler(rng, n):
        comp = rng.choice(len(w), size=n, p=w)
        return rng.normal(mus[comp], sigmas[comp])

    def cf(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(t.shape, dtype=np.complex128)
        for wi, mi, si in zip(w, mus, sigmas):
            out += wi * np.exp(-(si**2) * t**2 / 2.0 - 1j * mi * t)
        return out

    label = ",".join(f"{m:g}/{s:g}" for m, s in zip(mus, sigmas))
    return TestDensity(
        name=f"mixture({label})", pdf=pdf, sampler=sampler, char_fn=cf, **extra
    )


def scaled_cauchy(eta: float, **extra) -> TestDensity:
    """f0(x) = (1/eta) p(x/eta) for the standard Cauchy p; F[f0](t) = e^{-eta|t|}."""
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    return TestDensity(
        name=f"scaled_cauchy({eta:g})",
        pdf=lambda x: eta / (math.pi * (eta**2 + np.asarray(x, dtype=np.float64) ** 2)),
        # inverse CDF keeps the draw exact and reproducible
        sampler=lambda rng, n: eta * np.tan(math.pi * (rng.random(n) - 0.5)),
        char_fn=lambda t: np.exp(-eta * np.abs(np.asarray(t))).astype(np.complex128),
        **extra,
    )


def uniform_sum(m: int, width: float = 1.0, center: float = 0.0, **extra) -> TestDensity:
    """Density of center + width*(U_1 + ... + U_m - m/2); the cardinal
    B-spline of degree m-1, which lies in B^{m-1}(inf, inf) sharply."""
    if m < 1:
        raise ConfigurationError("need at least one uniform summand")
    spline = BSpline.basis_element(np.arange(m + 1), extrapolate=False)

    def pdf(x):
        u = (np.asarray(x, dtype=np.float64) - center) / width + m / 2.0
        out = spline(u)
        return np.nan_to_num(out, nan=0.0) / width

    def sampler(rng, n):
        return center + width * (rng.random((m, n)).sum(axis=0) - m / 2.0)

    def cf(t):
        t = np.asarray(t, dtype=np.float64) * width
        half = t / 2.0
        sinc = np.where(half == 0.0, 1.0, np.sin(half) / np.where(half == 0, 1.0, half))
        return (sinc**m).astype(np.complex128) * np.exp(
            -1j * np.asarray(t) * center / width
        )

    return TestDensity(
        name=f"uniform_sum({m},w={width:g})", pdf=pdf, sampler=sampler, char_fn=cf, **extra
    )


def cauchy_plus_bump(
    basis: MeyerBasis,
    eta: float,
    j: int,
    k: int,
    M: int,
    c_prime: float,
    s: float,
    grid: UniformGrid | None = None,
    **extra,
) -> TestDensity:
    """f_k = f0 + c' 2^{-j(s+1/2)} psi_{j, M k}; nonnegativity is checked
    numerically at construction."""
    base = scaled_cauchy(eta)
    amp = c_prime * 2.0 ** (-j * (s + 0.5))
    kM = M * k

    def pdf(x):
        x = np.asarray(x, dtype=np.float64)
        return base.pdf(x) + amp * 2.0 ** (j / 2.0) * eval_psi(
            basis, 2.0**j * x - kM
        )

    check = grid if grid is not None else UniformGrid.symmetric(64.0, 2**15)
    vals = pdf(check.points)
    if np.min(vals) < -1e-12:
        raise ConfigurationError(
            f"bump amplitude c'={c_prime:g} makes the density negative "
            f"(min {np.min(vals):.3e})"
        )

    def sampler(rng, n):
        # rejection against the Cauchy envelope
        ratio_bound = float(np.max(vals / base.pdf(check.points))) * (1.0 + 1e-9)
        out = np.empty(n)
        filled = 0
        while filled < n:
            want = max(64, int(1.5 * (n - filled) * ratio_bound))
            x = base.sampler(rng, want)
            u = rng.random(want)
            acc = x[u * ratio_bound * base.pdf(x) <= pdf(x)]
            take = min(acc.size, n - filled)
            out[filled : filled + take] = acc[:take]
            filled += take
        return out

    return TestDensity(
        name=f"cauchy_bump(eta={eta:g},j={j},k={kM},c'={c_prime:g})",
        pdf=pdf,
        sampler=sampler,
        **extra,
    )


def certify_supersmooth(
    density: TestDensity, c0_tilde: float, s: float, t_max: float = 200.0
) -> TestDensity:
    """Attach a SupersmoothSpec with L computed from the spectral integral
    (1/2pi) integral |F f|^2 e^{2 c0 |t|^s} dt; requires an analytic
    characteristic function and a finite integral."""
    if density.char_fn is None:
        raise ConfigurationError("certification needs an analytic char_fn")
    t = np.linspace(-t_max, t_max, 2**17 + 1)
    mod = np.abs(density.char_fn(t))
    # log-space keeps the weight exp(2 c0 |t|^s) from overflowing before the
    # characteristic function kills it
    with np.errstate(divide="ignore"):
        log_int = 2.0 * np.log(mod) + 2.0 * c0_tilde * np.abs(t) ** s
    integrand = np.where(mod > 0.0, np.exp(np.minimum(log_int, 700.0)), 0.0)
    total = float(np.trapezoid(integrand, t))
    tail = integrand[-1] * t_max
    if not math.isfinite(total) or tail > 1e-9 * total:
        raise ConfigurationError(
            f"spectral integral does not converge by t = {t_max:g}; "
            "the density is not in this supersmooth class"
        )
    L = total / (2.0 * math.pi) * 1.0000001
    return TestDensity(
        name=density.name,
        pdf=density.pdf,
        sampler=density.sampler,
        char_fn=density.char_fn,
        besov=density.besov,
        supersmooth=SupersmoothSpec(c0_tilde=c0_tilde, s=s, L=L),
    )


def sample_xy(density: TestDensity, model: ErrorModel, n: int, seed: int) -> np.ndarray:
    """Y = X + eps with independent streams for the signal and the noise."""
    if n < 1:
        raise ConfigurationError("need n >= 1")
    x = density.sample(n, derive_rng(seed, 0))
    if model.kind == "dirac":
        return x
    eps = np.asarray(model.sampler(derive_rng(seed, 1), n), dtype=np.float64)
    return x + eps


# ---------------------------------------------------------------------------
# Lower-bound construction (Cauchy plus wavelet bumps)
# ---------------------------------------------------------------------------


def lower_bound_family(
    basis: MeyerBasis,
    j: int,
    s: float,
    L: float,
    M: int | None = None,
    count: int = 2,
    max_level: int = 6,
) -> list[TestDensity]:
    """f0 plus count perturbed densities f_k = f0 + c' 2^{-j(s+1/2)} psi_{j,Mk}.

    eta is grown until ||f0||_{s,inf,inf} <= L/2 (certified through
    besov_norm); c' <= L/2 is then maximal, by bisection, subject to
    nonnegativity of every f_k on the grid.
    """
    if j < 1:
        raise ConfigurationError("need j >= 1")
    if count > 2**j - 1:
        raise ConfigurationError(f"count must not exceed 2^j - 1 = {2 ** j - 1}")
    spec = BesovSpec(s=s, p=math.inf, q=math.inf, L=L)
    grid = basis.grid
    eta = None
    for candidate in (1.0, 2.0, 4.0, 8.0, 16.0):
        f0 = scaled_cauchy(candidate)
        norm = besov_norm(f0.tabulate(grid), basis, spec, max_level)
        if norm <= L / 2.0:
            eta = candidate
            break
    if eta is None:
        raise ConfigurationError(f"no eta <= 16 reaches ||f0|| <= L/2 = {L / 2:g}")
    if M is None:
        M = min_translate_spacing(basis)

    f0 = scaled_cauchy(eta)
    base_vals = f0.pdf(grid.points)
    amp_shape = {}
    for k in range(1, count + 1):
        amp_shape[k] = 2.0 ** (j / 2.0) * eval_psi(basis, 2.0**j * grid.points - M * k)

    def family_min(cp: float) -> float:
        a = cp * 2.0 ** (-j * (s + 0.5))
        return min(
            float(np.min(base_vals + a * shape)) for shape in amp_shape.values()
        )

    hi = L / 2.0
    if family_min(hi) >= 0.0:
        c_prime = hi
    else:
        lo = 0.0
        for _ in range(60):
            mid = (lo + hi) / 2.0
            if family_min(mid) >= 0.0:
                lo = mid
            else:
                hi = mid
        c_prime = lo
    if c_prime <= 1e-6:
        raise ConfigurationError("no admissible bump amplitude c' > 1e-6")

    out = [f0]
    for k in range(1, count + 1):
        out.append(
            cauchy_plus_bump(basis, eta, j, k, M, c_prime, s, grid=grid)
        )
    return out


# ---------------------------------------------------------------------------
# Risk and coverage harnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EstimatorConfig:
    """Everything an estimator run needs besides the data."""

    basis: MeyerBasis
    grid: UniformGrid
    kind: str = "linear"  # linear | threshold
    rule: ResolutionRule | None = None
    j: int | None = None
    kappa_prime: float = DEFAULT_KAPPA_PRIME
    G: float | None = None  # None -> plug-in estimate per replication

    def __post_init__(self) -> None:
        if (self.rule is None) == (self.j is None) and self.kind == "linear":
            raise ConfigurationError("specify exactly one of rule or explicit j")
        if self.kind not in ("linear", "threshold"):
            raise ConfigurationError(f"unknown estimator kind {self.kind!r}")

    def level_for(self, n: int, model: ErrorModel) -> int:
        if self.j is not None:
            return self.j
        return select_resolution(self.rule, n, model, self.basis)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.j is not None:
            out["j"] = self.j
        if self.rule is not None:
            out["rule"] = {
                k: v
                for k, v in self.rule.__dict__.items()
                if v is not None
            }
        if self.kind == "threshold":
            out["kappa_prime"] = self.kappa_prime
        return out

    def estimate(self, samples: np.ndarray, model: ErrorModel):
        n = len(samples)
        if self.kind == "linear":
            j = self.level_for(n, model)
            atoms = build_atoms(model, self.basis, self.grid, j)
            return linear_estimate(samples, atoms, self.basis)
        j1 = select_resolution(
            self.rule if self.rule is not None else ResolutionRule.threshold_top(
                w=model.decay.w
            ),
            n,
            model,
            self.basis,
        )
        G = self.G if self.G is not None else estimate_G(samples, self.basis, self.grid)
        cfg = ThresholdConfig(
            kappa_prime=self.kappa_prime, w=model.decay.w, G=G, j1=j1
        )
        return threshold_estimate(samples, self.basis, model, cfg, self.grid)


@dataclass
class RiskReport:
    estimator: dict
    density: str
    model: str
    n_ladder: list[int]
    risks: list[float]
    mc_std_errors: list[float]
    n_mc: int
    seed: int
    fitted_slope: float | None
    slope_std_error: float | None
    target_slope: float | None = None
    levels: list[int] | None = None

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RiskReport":
        return cls(**json.loads(text))


def sup_norm_risk(
    config: EstimatorConfig,
    density: TestDensity,
    model: ErrorModel,
    n_ladder,
    n_mc: int,
    seed: int,
    target_slope: float | None = None,
) -> RiskReport:
    """Monte Carlo E sup_x |f^ - f| over the ladder, with an OLS rate fit."""
    if n_mc < 2:
        raise ConfigurationError("need n_mc >= 2 for standard errors")
    ladder = [int(n) for n in n_ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigurationError("the n-ladder must be strictly increasing")
    f_true = density.pdf(config.grid.points)
    risks: list[float] = []
    ses: list[float] = []
    levels: list[int] = []
    for i_n, n in enumerate(ladder):
        sups = np.empty(n_mc)
        for rep in range(n_mc):
            y = sample_xy(density, model, n, derive_rng_seed(seed, i_n, rep))
            est = config.estimate(y, model)
            sups[rep] = float(np.max(np.abs(est.values - f_true)))
        risks.append(float(sups.mean()))
        ses.append(float(sups.std(ddof=1) / math.sqrt(n_mc)))
        if config.kind == "linear":
            levels.append(config.level_for(n, model))
    slope = se = None
    if len(ladder) >= 4 and all(r > 0 for r in risks):
        slope, se, _ = _ols_loglog(np.asarray(ladder, float), np.asarray(risks))
    return RiskReport(
        estimator=config.describe(),
        density=density.name,
        model=model.describe(),
        n_ladder=ladder,
        risks=risks,
        mc_std_errors=ses,
        n_mc=n_mc,
        seed=seed,
        fitted_slope=slope,
        slope_std_error=se,
        target_slope=target_slope,
        levels=levels or None,
    )


def derive_rng_seed(seed: int, *path: int) -> int:
    """Counter-derived child seed (stable across processes)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFF)


@dataclass(frozen=True, eq=False)
class BandConfig:
    basis: MeyerBasis
    grid: UniformGrid
    j: int
    z: float
    delta: float = 0.0
    variant: str = "paper"
    target: str = "mean"  # mean -> E f_n; density -> f itself
    n_sign_draws: int = 1
    g_sup: float | None = None  # None -> plug-in pilot estimate


@dataclass
class CoverageReport:
    band: dict
    density: str
    model: str
    n: int
    replications: int
    hits: int
    empirical_coverage: float
    nominal: float
    mean_half_width: float
    seed: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CoverageReport":
        return cls(**json.loads(text))


def coverage_experiment(
    config: BandConfig,
    density: TestDensity,
    model: ErrorModel,
    n: int,
    n_mc: int,
    seed: int,
) -> CoverageReport:
    """Empirical band coverage of E f_n (or of f) over n_mc replications.

    E f_n is computed once, by quadrature of the kernel against the
    observed density g = f * phi_err.
    """
    basis, grid = config.basis, config.grid
    atoms = build_atoms(model, basis, grid, config.j)
    f_tab = density.tabulate(grid)
    if config.target == "mean":
        target = expected_estimate(convolve_density(f_tab, model), atoms, basis).values
    elif config.target == "density":
        target = f_tab.values.real
    else:
        raise ConfigurationError(f"unknown band target {config.target!r}")
    hits = 0
    widths = np.empty(n_mc)
    for rep in range(n_mc):
        rep_seed = derive_rng_seed(seed, rep)
        y = sample_xy(density, model, n, rep_seed)
        est = linear_estimate(y, atoms, basis)
        stat = rademacher_sup(
            y, atoms, basis, seed=derive_rng_seed(seed, rep, 1), n_sign_draws=config.n_sign_draws
        )
        g_sup = config.g_sup
        if g_sup is None:
            g_sup = max(pilot_density_sup(y, basis, grid), 1e-12)
        sigma = sigma_r(
            stat, est.n, config.j, config.z, g_sup, atoms.delta_j, basis, config.variant
        )
        band = build_band(est, sigma, config.delta, config.z, config.variant)
        widths[rep] = (1.0 + config.delta) * sigma
        if bool(np.all((band.lower <= target) & (target <= band.upper))):
            hits += 1
    nominal = 1.0 - math.exp(-config.z)
    return CoverageReport(
        band={
            "j": config.j,
            "z": config.z,
            "delta": config.delta,
            "variant": config.variant,
            "target": config.target,
            "n_sign_draws": config.n_sign_draws,
        },
        density=density.name,
        model=model.describe(),
        n=n,
        replications=n_mc,
        hits=hits,
        empirical_coverage=hits / n_mc,
        nominal=nominal,
        mean_half_width=float(widths.mean()),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Supersmooth bias ladder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BiasPoint:
    j: int
    gap: float
    bound: float


def bias_check(
    density: TestDensity,
    basis: MeyerBasis,
    j_ladder,
    grid: UniformGrid | None = None,
) -> list[BiasPoint]:
    """Measured ||K_j f - f||_inf next to the supersmooth bias envelope
    c''' sqrt(L) 2^{j(1-s)/2} exp(-c0 (a')^s 2^{js}) at the fitted c'''.

    Grid quadrature bottoms out near 1e-13 of ||f||_inf; ladders that
    decay below that need the high-precision spectral route (see
    tests) rather than this tabulated one.
    """
    ss = density.supersmooth
    if ss is None:
        raise ConfigurationError("density carries no supersmooth certificate")
    if grid is None:
        grid = UniformGrid.symmetric(16.0, 2**14)
    f_tab = density.tabulate(grid)
    f_vals = f_tab.values.real
    gaps = []
    for j in j_ladder:
        kj = project_density(f_tab, basis, grid, int(j))
        gaps.append(float(np.max(np.abs(kj.values - f_vals))))
    envelopes = [
        math.sqrt(ss.L)
        * 2.0 ** (j * (1.0 - ss.s) / 2.0)
        * math.exp(-ss.c0_tilde * basis.a_prime**ss.s * 2.0 ** (j * ss.s))
        for j in j_ladder
    ]
    c = max(g / e for g, e in zip(gaps, envelopes))
    return [
        BiasPoint(j=int(j), gap=g, bound=c * e)
        for j, g, e in zip(j_ladder, gaps, envelopes)
    ]


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------


def _ols_loglog(n: np.ndarray, risks: np.ndarray) -> tuple[float, float, tuple[float, float]]:
    x = np.log(n)
    y = np.log(risks)
    xm = x - x.mean()
    slope = float(np.sum(xm * y) / np.sum(xm**2))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = len(n) - 2
    s2 = float(np.sum(resid**2) / dof) if dof > 0 else 0.0
    se = math.sqrt(s2 / float(np.sum(xm**2)))
    tq = sps.t.ppf(0.975, dof) if dof > 0 else math.nan
    return slope, se, (slope - tq * se, slope + tq * se)


def rate_fit(report: RiskReport) -> tuple[float, float, tuple[float, float]]:
    """OLS slope of log risk on log n with its standard error and 95% CI."""
    if len(report.n_ladder) < 4:
        raise InsufficiencyError("rate fitting needs at least 4 ladder points")
    risks = np.asarray(report.risks, dtype=np.float64)
    if np.any(risks <= 0):
        raise InsufficiencyError(
            "zero or negative risks: slope undefined (degenerate estimator)"
        )
    return _ols_loglog(np.asarray(report.n_ladder, dtype=np.float64), risks)
