"""Command-line front end.

Subcommands: estimate, band, rates (alias: simulate), coverage,
basis-info.  All numeric output is written with 17 significant digits so
files round-trip bit-exactly.

Exit codes: 0 success, 2 usage (argparse), 3 parse error, 4 configuration
error, 5 ill-posedness guard, 6 missing capability, 7 unexpected failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import derive_rng
from .confidence import build_band, rademacher_sup, sigma_r
from .error_models import (
    DecayClass,
    ErrorModel,
    Regime,
    cauchy,
    custom_from_csv,
    delta_j,
    dirac,
    gaussian,
    laplace,
)
from .estimators import (
    DEFAULT_KAPPA_PRIME,
    ResolutionRule,
    ThresholdConfig,
    estimate_G,
    linear_estimate,
    pilot_density_sup,
    select_resolution,
    threshold_estimate,
)
from .atoms import build_atoms
from .exceptions import (
    CapabilityError,
    ConfigurationError,
    IllPosednessError,
    MeyerDeconvError,
    ParseError,
)
from .grids import UniformGrid
from .meyer import build_meyer, summability_constants
from .simulate import (
    BandConfig,
    EstimatorConfig,
    TestDensity,
    coverage_experiment,
    gaussian_density,
    gaussian_mixture,
    scaled_cauchy,
    sup_norm_risk,
    uniform_sum,
)

EXIT_PARSE = 3
EXIT_CONFIG = 4
EXIT_ILLPOSED = 5
EXIT_CAPABILITY = 6
EXIT_UNEXPECTED = 7

_ENV_OUTDIR = "MEYERDECONV_OUTDIR"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def parse_error_model(spec: str) -> ErrorModel:
    """Flat shell syntax: dirac | gaussian:0.5 | laplace:1.0 | cauchy:0.3
    | custom:path.csv[,w=..,c0=..,alpha=..,C=..,jmax=..]."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name == "dirac":
        return dirac()
    if name in ("gaussian", "laplace", "cauchy"):
        if not rest:
            raise ConfigurationError(f"{name} needs one parameter, e.g. {name}:1.0")
        ctor = {"gaussian": gaussian, "laplace": laplace, "cauchy": cauchy}[name]
        return ctor(float(rest.split(",")[0]))
    if name == "custom":
        parts = rest.split(",")
        path = parts[0]
        opts = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        w = float(opts.get("w", 0.0))
        c0 = float(opts.get("c0", 0.0))
        alpha = float(opts.get("alpha", 1.0))
        C = float(opts.get("C", 1.0))
        regime = (
            Regime.NONE if (c0 == 0 and w == 0) else (Regime.MODERATE if c0 == 0 else Regime.SEVERE)
        )
        decay = DecayClass(C=C, w=w, c0=c0, alpha=alpha, regime=regime)
        return custom_from_csv(path, decay, j_max=int(opts.get("jmax", 4)))
    raise ConfigurationError(f"unknown error model {spec!r}")


def parse_rule(spec: str) -> ResolutionRule:
    """moderate:s=2,w=2 | severe:alpha=2,nu=0.01 | threshold_top:w=2
    | supersmooth:s=2,c0=0.49  (optional ,rounding=floor|nearest)."""
    name, _, rest = spec.partition(":")
    opts = dict(p.split("=", 1) for p in rest.split(",") if "=" in p)
    rounding = opts.pop("rounding", "floor")
    name = name.strip().lower()
    try:
        if name == "moderate":
            return ResolutionRule.moderate(float(opts["s"]), float(opts["w"]), rounding)
        if name == "severe":
            return ResolutionRule.severe(float(opts["alpha"]), float(opts["nu"]), rounding)
        if name in ("threshold_top", "threshold"):
            return ResolutionRule.threshold_top(float(opts["w"]))
        if name == "supersmooth":
            return ResolutionRule.supersmooth(float(opts["s"]), float(opts["c0"]), rounding)
    except KeyError as exc:
        raise ConfigurationError(f"rule {spec!r} is missing parameter {exc}")
    raise ConfigurationError(f"unknown resolution rule {spec!r}")


def parse_density(cfg: dict) -> TestDensity:
    kind = cfg.get("kind")
    if kind == "gaussian":
        return gaussian_density(float(cfg.get("mu", 0.0)), float(cfg["sigma"]))
    if kind == "gaussian_mixture":
        return gaussian_mixture(cfg["weights"], cfg["mus"], cfg["sigmas"])
    if kind == "scaled_cauchy":
        return scaled_cauchy(float(cfg["eta"]))
    if kind == "uniform_sum":
        return uniform_sum(
            int(cfg["m"]), float(cfg.get("width", 1.0)), float(cfg.get("center", 0.0))
        )
    raise ConfigurationError(f"unknown density kind {kind!r}")


def read_samples(path) -> np.ndarray:
    """Single-column CSV or newline-delimited floats."""
    vals = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip().split(",")[0]
            if not token:
                continue
            try:
                vals.append(float(token))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ParseError(f"bad sample value {token!r}", line=lineno)
    if not vals:
        raise ParseError("no samples found")
    return np.asarray(vals)


def default_grid(samples: np.ndarray, count: int = 2**14) -> UniformGrid:
    """[-R, R) with R = the next power of two above the sample range plus
    six sample standard deviations."""
    spread = float(np.max(np.abs(samples)) + 6.0 * np.std(samples))
    radius = 2.0 ** max(3, math.ceil(math.log2(max(spread, 1e-6))))
    return UniformGrid.symmetric(radius, count)


def _outdir(args) -> Path:
    out = args.out or os.environ.get(_ENV_OUTDIR) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_xy(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def _grid_for(args, samples) -> UniformGrid:
    if args.radius is not None:
        return UniformGrid.symmetric(args.radius, args.count)
    return default_grid(samples, args.count)


def cmd_estimate(args) -> int:
    samples = read_samples(args.input)
    model = parse_error_model(args.error)
    grid = _grid_for(args, samples)
    basis = build_meyer()
    out = _outdir(args)
    n = len(samples)
    sidecar: dict = {"n_input": n, "error_model": model.describe(), "seed": args.seed}
    if args.estimator == "linear":
        j = args.j if args.j is not None else select_resolution(
            parse_rule(args.rule), n, model, basis
        )
        atoms = build_atoms(model, basis, grid, j)
        est = linear_estimate(samples, atoms, basis)
        sidecar.update(
            {
                "estimator": "linear",
                "j": j,
                "n_used": est.n,
                "dropped": est.dropped,
                "delta_j": atoms.delta_j,
            }
        )
    else:
        rule = parse_rule(args.rule) if args.rule else ResolutionRule.threshold_top(
            w=model.decay.w
        )
        j1 = args.j if args.j is not None else select_resolution(rule, n, model, basis)
        G = args.G if args.G is not None else estimate_G(samples, basis, grid)
        cfg = ThresholdConfig(
            kappa_prime=args.kappa_prime, w=model.decay.w, G=G, j1=j1
        )
        est = threshold_estimate(samples, basis, model, cfg, grid)
        sidecar.update(
            {
                "estimator": "threshold",
                "j1": j1,
                "n_used": est.n,
                "dropped": est.dropped,
                "kappa_prime": args.kappa_prime,
                "G": G,
                "kept_per_level": list(est.kept_per_level),
                "delta_j": build_atoms(model, basis, grid, 0).delta_j,
            }
        )
    _write_xy(out / "estimate.csv", ["x", "fhat"], (grid.points, est.values))
    (out / "estimate.json").write_text(json.dumps(sidecar, indent=2))
    print(f"wrote {out / 'estimate.csv'} and estimate.json")
    return 0


def cmd_band(args) -> int:
    samples = read_samples(args.input)
    model = parse_error_model(args.error)
    grid = _grid_for(args, samples)
    basis = build_meyer()
    out = _outdir(args)
    atoms = build_atoms(model, basis, grid, args.j)
    est = linear_estimate(samples, atoms, basis)
    stat = rademacher_sup(
        samples, atoms, basis, seed=args.seed, n_sign_draws=args.sign_draws
    )
    g_sup = args.g_sup if args.g_sup is not None else max(
        pilot_density_sup(samples, basis, grid), 1e-12
    )
    sigma = sigma_r(
        stat, est.n, args.j, args.z, g_sup, atoms.delta_j, basis, args.variant
    )
    band = build_band(est, sigma, args.delta, args.z, args.variant)
    _write_xy(
        out / "band.csv",
        ["x", "lower", "center", "upper"],
        (grid.points, band.lower, band.center, band.upper),
    )
    sidecar = {
        "z": args.z,
        "delta": args.delta,
        "variant": args.variant,
        "R_n": stat.value,
        "sigma_R": sigma,
        "g_sup": g_sup,
        "g_sup_source": "override" if args.g_sup is not None else "pilot plug-in",
        "j": args.j,
        "n_used": est.n,
        "dropped": est.dropped,
        "nominal_coverage": 1.0 - math.exp(-args.z),
    }
    (out / "band.json").write_text(json.dumps(sidecar, indent=2))
    print(f"wrote {out / 'band.csv'} and band.json")
    return 0


def _experiment_common(config_path):
    cfg = json.loads(Path(config_path).read_text())
    density = parse_density(cfg["density"])
    model = parse_error_model(cfg["error"])
    basis = build_meyer()
    grid = UniformGrid.symmetric(
        float(cfg.get("radius", 16.0)), int(cfg.get("count", 2**14))
    )
    return cfg, density, model, basis, grid


def cmd_rates(args) -> int:
    cfg, density, model, basis, grid = _experiment_common(args.config)
    est_cfg = EstimatorConfig(
        basis=basis,
        grid=grid,
        kind=cfg.get("estimator", "linear"),
        rule=parse_rule(cfg["rule"]) if "rule" in cfg else None,
        j=cfg.get("j"),
        kappa_prime=float(cfg.get("kappa_prime", DEFAULT_KAPPA_PRIME)),
    )
    report = sup_norm_risk(
        est_cfg,
        density,
        model,
        cfg["n_ladder"],
        int(cfg.get("n_mc", 200)),
        int(cfg.get("seed", 0)),
        target_slope=cfg.get("target_slope"),
    )
    out = _outdir(args)
    (out / "risk_report.json").write_text(report.to_json())
    _write_xy(
        out / "risk_report.csv",
        ["n", "risk", "mc_std_error"],
        (report.n_ladder, report.risks, report.mc_std_errors),
    )
    slope = "n/a" if report.fitted_slope is None else _fmt(report.fitted_slope)
    print(f"fitted slope: {slope}; wrote {out / 'risk_report.json'}")
    return 0


def cmd_coverage(args) -> int:
    cfg, density, model, basis, grid = _experiment_common(args.config)
    band = BandConfig(
        basis=basis,
        grid=grid,
        j=int(cfg["j"]),
        z=float(cfg.get("z", 1.0)),
        delta=float(cfg.get("delta", 0.0)),
        variant=cfg.get("variant", "paper"),
        target=cfg.get("target", "mean"),
        n_sign_draws=int(cfg.get("n_sign_draws", 1)),
    )
    report = coverage_experiment(
        band, density, model, int(cfg["n"]), int(cfg.get("n_mc", 500)), int(cfg.get("seed", 0))
    )
    out = _outdir(args)
    (out / "coverage_report.json").write_text(report.to_json())
    print(
        f"coverage {report.empirical_coverage:.4f} vs nominal {report.nominal:.4f}; "
        f"wrote {out / 'coverage_report.json'}"
    )
    return 0


def cmd_basis_info(args) -> int:
    basis = build_meyer()
    c32 = summability_constants(basis, radius=32)
    info = {
        "a": basis.a,
        "a_prime": basis.a_prime,
        "c_phi": basis.c_phi,
        "c_psi": basis.c_psi,
        "c_phi_radius32": c32[0],
        "c_psi_radius32": c32[1],
        "phi_l1": basis.phi_l1,
        "psi_l1": basis.psi_l1,
        "phi_sup": basis.phi_sup,
        "psi_sup": basis.psi_sup,
        "translate_radius": basis.translate_radius,
        "spectral_support_ok": True,
        "version": __version__,
    }
    if args.error:
        model = parse_error_model(args.error)
        info["delta_j"] = {
            str(j): delta_j(model, basis, j) for j in range(args.jmax + 1)
        }
    text = json.dumps(info, indent=2)
    if args.out:
        out = _outdir(args)
        (out / "basis_info.json").write_text(text)
        print(f"wrote {out / 'basis_info.json'}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="meyerdeconv",
        description="Band-limited wavelet density deconvolution toolkit",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(q):
        q.add_argument("--out", help=f"output directory (default ${_ENV_OUTDIR} or .)")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--threads", type=int, default=1, help="worker threads (default 1 for bit-reproducibility)")

    est = sub.add_parser("estimate", help="density estimate from a sample file")
    est.add_argument("--input", required=True)
    est.add_argument("--error", required=True, help="e.g. laplace:1.0")
    est.add_argument("--estimator", choices=["linear", "threshold"], default="linear")
    group = est.add_mutually_exclusive_group(required=True)
    group.add_argument("--rule", help="e.g. moderate:s=2,w=2")
    group.add_argument("--j", type=int, help="explicit resolution level")
    est.add_argument("--kappa-prime", dest="kappa_prime", type=float, default=DEFAULT_KAPPA_PRIME)
    est.add_argument("--G", type=float, default=None, help="noise factor (default plug-in)")
    est.add_argument("--radius", type=float, default=None, help="grid half-width")
    est.add_argument("--count", type=int, default=2**14, help="grid points (power of two)")
    add_common(est)
    est.set_defaults(func=cmd_estimate)

    band = sub.add_parser("band", help="Rademacher confidence band")
    band.add_argument("--input", required=True)
    band.add_argument("--error", required=True)
    band.add_argument("--j", type=int, required=True)
    band.add_argument("--z", type=float, required=True)
    band.add_argument("--delta", type=float, default=0.0)
    band.add_argument("--variant", choices=["paper", "practical"], default="paper")
    band.add_argument("--sign-draws", dest="sign_draws", type=int, default=1)
    band.add_argument("--g-sup", dest="g_sup", type=float, default=None)
    band.add_argument("--radius", type=float, default=None)
    band.add_argument("--count", type=int, default=2**14)
    add_common(band)
    band.set_defaults(func=cmd_band)

    for name in ("rates", "simulate"):
        rates = sub.add_parser(
            name,
            help="Monte Carlo sup-norm risk ladder from a JSON config"
            + (" (alias of rates)" if name == "simulate" else ""),
        )
        rates.add_argument("--config", required=True)
        add_common(rates)
        rates.set_defaults(func=cmd_rates)

    cov = sub.add_parser("coverage", help="band coverage experiment from a JSON config")
    cov.add_argument("--config", required=True)
    add_common(cov)
    cov.set_defaults(func=cmd_coverage)

    binfo = sub.add_parser("basis-info", help="tabulated basis constants")
    binfo.add_argument("--error", default=None, help="also report delta_j for this model")
    binfo.add_argument("--jmax", type=int, default=4)
    add_common(binfo)
    binfo.set_defaults(func=cmd_basis_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except IllPosednessError as exc:
        print(f"ill-posed: {exc}", file=sys.stderr)
        return EXIT_ILLPOSED
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ConfigurationError, MeyerDeconvError, FileNotFoundError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
