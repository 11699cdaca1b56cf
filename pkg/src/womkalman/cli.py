"""Command-line front end for reproducible chain experiments.

Subcommands:

* ``precision``      -- deterministic precision trajectory as CSV/JSON rows.
* ``rate``           -- fit the growth exponent/constant and compare with the
  closed-form prediction.
* ``montecarlo``     -- stochastic consistency check of the precision
  recursion (seed required).
* ``riccati``        -- generic slow-growth recursion: predicted vs empirical
  limit (``f`` chosen from presets, since arbitrary callables cannot cross a
  command line).
* ``gaussian-check`` -- randomized equivalence of the precision-form update
  against direct joint-Gaussian conditioning.
* ``verify``         -- reduced-scale smoke suite over all of the above with
  scale-appropriate tolerances; exit 0 iff every check passes.

Exit codes: 0 success, 1 check failure, 2 usage/validation error.  All
output is deterministic for a fixed command line (including seed): reals are
printed with 17 significant digits, which round-trips float64 exactly.

Every flag may also be supplied through ``--config FILE`` (a JSON object
keyed by flag name with dashes replaced by underscores); explicitly given
flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from typing import Callable, Optional, Sequence

import numpy as np

from . import asymptotics, gaussian, ratefit
from .cascade import (
    CascadeConfig,
    Regime,
    gamma_chain,
    leading_coefficient,
    predict_rate,
    run_trajectory,
)
from .montecarlo import McConfig, run_paths

__all__ = ["main", "build_parser"]


def _fmt(x: float) -> str:
    """17 significant digits: exact round-trip for 64-bit floats."""
    return f"{x:.17g}"


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit(cfg: dict, header: list[str], rows: list[list], out_format: str, output: str) -> None:
    if out_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else str(v) for v in row])
        _write_text(output, buf.getvalue())
    else:
        results = [dict(zip(header, row)) for row in rows]
        payload = {"config": cfg, "results": results}
        _write_text(output, json.dumps(payload, indent=2) + "\n")


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults <- config file <- explicitly passed flags."""
    cfg = dict(defaults)
    path = getattr(args, "config", None)
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = sorted(set(data) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(data)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _cascade_from(cfg: dict) -> CascadeConfig:
    return CascadeConfig(
        m=int(cfg["m"]),
        lambda_e=float(cfg["lambda_e"]),
        lambda_w=tuple(float(x) for x in cfg["lambda_w"]),
        rho0=float(cfg["rho0"]),
        delta=float(cfg["delta"]),
        regime=Regime(cfg["regime"]),
    )


_CASCADE_DEFAULTS = {
    "m": 2,
    "lambda_e": 1.0,
    "lambda_w": [1.0],
    "rho0": 1.0,
    "delta": 0.0,
    "regime": "unscaled",
}


def _add_cascade_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, help="number of chained sensors (1..12)")
    p.add_argument("--lambda-e", dest="lambda_e", type=float, help="observation noise variance")
    p.add_argument(
        "--lambda-w",
        dest="lambda_w",
        type=float,
        nargs="+",
        help="m-1 transmission noise variances",
    )
    p.add_argument("--rho0", type=float, help="initial public precision")
    p.add_argument("--delta", type=float, help="prior-scaling exponent")
    p.add_argument(
        "--regime",
        choices=[r.value for r in Regime],
        help="prior-handling regime",
    )


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json"], help="output format")
    p.add_argument("--output", "-o", help="output path, '-' for stdout")
    p.add_argument("--config", help="JSON file with defaults for any flag")


# ---------------------------------------------------------------- precision


def cmd_precision(args: argparse.Namespace) -> int:
    defaults = {
        **_CASCADE_DEFAULTS,
        "kmax": 100,
        "sample": "all",
        "points_per_decade": 32,
        "format": "csv",
        "output": "-",
    }
    cfg = _merged(args, defaults)
    cascade = _cascade_from(cfg)
    states = run_trajectory(
        cascade, int(cfg["kmax"]), schedule=cfg["sample"], points_per_decade=int(cfg["points_per_decade"])
    )
    m = cascade.m
    header = (
        ["k", "rho", "denom"]
        + [f"gamma_{j}" for j in range(1, m)]
        + [f"alpha_{j}" for j in range(1, m + 1)]
    )
    rows = [
        [st.k, st.rho, st.denom, *st.gamma, *st.alpha]
        for st in states
    ]
    _emit(cfg, header, rows, cfg["format"], cfg["output"])
    return 0


# --------------------------------------------------------------------- rate


def cmd_rate(args: argparse.Namespace) -> int:
    defaults = {
        **_CASCADE_DEFAULTS,
        "kmax": 10**6,
        "points_per_decade": 32,
        "window_decades": 2.0,
        "tail_fraction": 0.25,
        "format": "json",
        "output": "-",
    }
    cfg = _merged(args, defaults)
    cascade = _cascade_from(cfg)
    k_max = int(cfg["kmax"])
    states = run_trajectory(cascade, k_max, schedule="geometric",
                            points_per_decade=int(cfg["points_per_decade"]))
    samples = [(st.k, st.rho) for st in states]
    prediction = predict_rate(cascade)
    k_lo = max(1, math.ceil(k_max / 10.0 ** float(cfg["window_decades"])))
    fit = ratefit.fit_power_law(samples, window=(k_lo, k_max))
    constant_hat = ratefit.ratio_limit(samples, prediction.beta, float(cfg["tail_fraction"]))
    header = [
        "beta_hat",
        "beta_theory",
        "constant_hat",
        "constant_theory",
        "r_squared",
        "rel_err_beta",
        "rel_err_constant",
    ]
    row = [
        fit.beta_hat,
        prediction.beta,
        constant_hat,
        prediction.constant,
        fit.r_squared,
        abs(fit.beta_hat - prediction.beta) / prediction.beta,
        abs(constant_hat - prediction.constant) / prediction.constant,
    ]
    _emit(cfg, header, [row], cfg["format"], cfg["output"])
    return 0


# --------------------------------------------------------------- montecarlo


def cmd_montecarlo(args: argparse.Namespace) -> int:
    defaults = {
        **_CASCADE_DEFAULTS,
        "kmax": 1000,
        "paths": 1000,
        "seed": None,
        "theta_bar": 0.0,
        "checkpoints": None,
        "format": "csv",
        "output": "-",
    }
    cfg = _merged(args, defaults)
    if cfg["seed"] is None:
        raise ValueError("--seed is required for montecarlo (no silent entropy)")
    cascade = _cascade_from(cfg)
    k_max = int(cfg["kmax"])
    checkpoints = cfg["checkpoints"]
    if checkpoints is None:
        checkpoints = [k for k in (1, 10, 100, 1000, 10_000) if k <= k_max]
    mc = McConfig(
        cascade=cascade,
        theta_bar=float(cfg["theta_bar"]),
        n_paths=int(cfg["paths"]),
        k_max=k_max,
        seed=int(cfg["seed"]),
        checkpoint_ks=tuple(checkpoints),
    )
    reports = run_paths(mc)
    header = ["k", "empirical_mse", "predicted_var", "ratio", "lo", "hi", "status"]
    rows = []
    any_fail = False
    for rep in reports:
        ok = rep.within_bounds
        any_fail |= not ok
        rows.append(
            [rep.k, rep.empirical_mse, rep.predicted_var, rep.ratio,
             rep.chi2_bounds[0], rep.chi2_bounds[1], "pass" if ok else "fail"]
        )
    _emit(cfg, header, rows, cfg["format"], cfg["output"])
    calibrated = cascade.regime in (Regime.UNSCALED, Regime.ZEROED_PRIOR)
    return 1 if (any_fail and calibrated) else 0


# ------------------------------------------------------------------ riccati


def _riccati_f(preset: str, param: float) -> Callable[[float], float]:
    if preset == "linear":
        return lambda x: x
    if preset == "affine":
        if param < 0.0:
            raise ValueError(f"affine offset must be >= 0, got {param!r}")
        return lambda x: param + x
    if preset == "power":
        if not (0.0 < param <= 1.0):
            raise ValueError(f"power exponent must lie in (0, 1], got {param!r}")
        return lambda x: x**param
    raise ValueError(f"unknown f preset {preset!r}")


def cmd_riccati(args: argparse.Namespace) -> int:
    defaults = {
        "c": 1.0,
        "n": 1,
        "delta": 0.0,
        "f": "linear",
        "f_param": 1.0,
        "x0": 1.0,
        "kmax": 10**6,
        "tail_fraction": 0.25,
        "format": "json",
        "output": "-",
    }
    cfg = _merged(args, defaults)
    spec = asymptotics.RiccatiSpec(
        c=float(cfg["c"]),
        n=int(cfg["n"]),
        delta=float(cfg["delta"]),
        f=_riccati_f(cfg["f"], float(cfg["f_param"])),
        x0=float(cfg["x0"]),
    )
    limit = asymptotics.predict_limit(spec)
    empirical = asymptotics.empirical_limit(spec, int(cfg["kmax"]), float(cfg["tail_fraction"]))
    header = ["beta", "constant_theory", "method", "constant_empirical", "rel_err"]
    row = [
        limit.beta,
        limit.constant,
        limit.method.value,
        empirical,
        abs(empirical - limit.constant) / limit.constant,
    ]
    _emit(cfg, header, [row], cfg["format"], cfg["output"])
    return 0


# ----------------------------------------------------------- gaussian-check


def _gaussian_oracle_errors(trials: int, seed: int) -> tuple[float, float]:
    """Max discrepancy between the precision-form update and direct conditioning.

    The mean discrepancy is scaled by max(|prior mean|, |observation|, 1):
    the posterior mean is a convex combination of the two, so their
    magnitude is its natural scale.
    """
    rng = np.random.default_rng(seed)
    worst_mean = worst_var = 0.0
    for _ in range(trials):
        theta_bar = rng.uniform(-10.0, 10.0)
        var0 = 10.0 ** rng.uniform(-3.0, 3.0)
        var_e = 10.0 ** rng.uniform(-3.0, 3.0)
        s = rng.uniform(-10.0, 10.0)
        post = gaussian.bayes_update(gaussian.Belief(theta_bar, 1.0 / var0), s, 1.0 / var_e)
        mean_direct = theta_bar + (s - theta_bar) * var0 / (var0 + var_e)
        var_direct = var0 * var_e / (var0 + var_e)
        scale = max(abs(theta_bar), abs(s), 1.0)
        worst_mean = max(worst_mean, abs(post.mean - mean_direct) / scale)
        worst_var = max(worst_var, abs(post.variance - var_direct) / var_direct)
    return worst_mean, worst_var


def cmd_gaussian_check(args: argparse.Namespace) -> int:
    defaults = {"trials": 100_000, "seed": 0, "tol": 1e-12, "format": "json", "output": "-"}
    cfg = _merged(args, defaults)
    worst_mean, worst_var = _gaussian_oracle_errors(int(cfg["trials"]), int(cfg["seed"]))
    tol = float(cfg["tol"])
    ok = worst_mean <= tol and worst_var <= tol
    header = ["trials", "max_rel_err_mean", "max_rel_err_variance", "tol", "status"]
    row = [int(cfg["trials"]), worst_mean, worst_var, tol, "pass" if ok else "fail"]
    _emit(cfg, header, [row], cfg["format"], cfg["output"])
    return 0 if ok else 1


# ------------------------------------------------------------------- verify


def _verify_checks(quick: bool) -> list[tuple[str, str, Callable[[], tuple[float, float]]]]:
    """Checks as (name, description, runner); runner returns (measure, bound).

    A check passes when measure <= bound.  Scales and tolerances are the
    reduced-scale smoke values; the full-scale acceptance suite in the test
    tree uses the tighter published tolerances.
    """
    k_traj = 10_000 if quick else 100_000
    n_paths = 200 if quick else 1000
    k_ric = 10_000 if quick else 100_000

    def cascade_cfg(m=2, regime=Regime.UNSCALED, delta=0.0, lam_w=None):
        return CascadeConfig(
            m=m,
            lambda_e=1.0,
            lambda_w=tuple(lam_w if lam_w is not None else [1.0] * (m - 1)),
            rho0=1.0,
            delta=delta,
            regime=regime,
        )

    def samples_for(cfg, kmax):
        return [(st.k, st.rho) for st in run_trajectory(cfg, kmax, schedule="geometric")]

    def beta_dev(cfg, kmax, beta_theory):
        s = samples_for(cfg, kmax)
        fit = ratefit.fit_power_law(s, window=(max(1, kmax // 100), kmax))
        return abs(fit.beta_hat - beta_theory)

    def ratio_dev(cfg, kmax, beta_theory, const_theory):
        s = samples_for(cfg, kmax)
        return abs(ratefit.ratio_limit(s, beta_theory) - const_theory) / const_theory

    checks: list[tuple[str, str, Callable[[], tuple[float, float]]]] = []

    def add(name, desc, fn):
        checks.append((name, desc, fn))

    add("two_agent_beta", "m=2 unscaled exponent vs 1/3",
        lambda: (beta_dev(cascade_cfg(), k_traj, 1 / 3), 0.05 if quick else 0.04))
    add("two_agent_ratio", "m=2 unscaled constant vs 3^(1/3)",
        lambda: (ratio_dev(cascade_cfg(), k_traj, 1 / 3, 3 ** (1 / 3)), 0.10 if quick else 0.06))
    add("three_agent_beta", "m=3 unscaled exponent vs 1/7",
        lambda: (beta_dev(cascade_cfg(m=3), k_traj, 1 / 7), 0.06 if quick else 0.035))
    add("three_agent_ratio", "m=3 unscaled constant vs 7^(1/7)",
        lambda: (ratio_dev(cascade_cfg(m=3), k_traj, 1 / 7, 7 ** (1 / 7)), 0.25 if quick else 0.15))
    add("scaled_half_beta", "m=2 delta=0.5 exponent vs 2/3",
        lambda: (beta_dev(cascade_cfg(regime=Regime.SCALED, delta=0.5), k_traj, 2 / 3),
                 0.07 if quick else 0.04))
    add("scaled_half_ratio", "m=2 delta=0.5 constant vs (3/2)^(1/3)",
        lambda: (ratio_dev(cascade_cfg(regime=Regime.SCALED, delta=0.5), k_traj, 2 / 3,
                           (3 / 2) ** (1 / 3)), 0.25 if quick else 0.20))

    def linear_rate_check():
        cfg = cascade_cfg(regime=Regime.SCALED, delta=1.0)
        const = predict_rate(cfg).constant
        return (ratio_dev(cfg, k_traj, 1.0, const), 0.03)

    add("scaled_one_linear", "m=2 delta=1 slope vs exact fixed point", linear_rate_check)

    def saturation_check():
        cfg = cascade_cfg(regime=Regime.SCALED, delta=2.0)
        states = run_trajectory(cfg, k_traj, schedule="geometric")
        final = states[-1]
        return (abs(final.rho / final.k - 0.5) / 0.5, 0.01)

    add("scaled_two_saturation", "m=2 delta=2: rho_k/k vs 1/2", saturation_check)

    def zeroed_check():
        worst = 0.0
        for m, lam_w in ((2, [1.0]), (3, [1.0, 2.0]), (5, [1.0, 2.0, 2.0, 2.0])):
            cfg = cascade_cfg(m=m, regime=Regime.ZEROED_PRIOR, lam_w=lam_w)
            final = run_trajectory(cfg, k_traj, schedule="geometric")[-1]
            expected = cfg.rho0 + final.k / cfg.noise_sum
            worst = max(worst, abs(final.rho - expected) / expected)
        return (worst, 1e-12)

    add("zeroed_identity", "zeroed prior: rho_k == rho0 + k/(lambda_e+sum(lambda_w))", zeroed_check)

    def bounded_check():
        cfg = cascade_cfg(regime=Regime.SCALED_LAST, delta=1.0)
        states = run_trajectory(cfg, k_traj, schedule="all")
        rhos = [st.rho for st in states]
        bound = rhos[1] + 2.0
        tail = rhos[int(0.9 * len(rhos)):]
        ok_max = max(rhos) <= bound
        tail_range = max(tail) - min(tail)
        return (0.0 if (ok_max and tail_range < 1e-3) else 1.0, 0.5)

    add("scaled_last_bounded", "m=2 delta=1 scaled-last precision stays bounded", bounded_check)

    def mc_check():
        mc = McConfig(
            cascade=cascade_cfg(),
            theta_bar=0.0,
            n_paths=n_paths,
            k_max=1000,
            seed=20260810,
            checkpoint_ks=(1, 10, 100, 1000),
        )
        bad = 0
        for rep in run_paths(mc):
            if not rep.within_bounds or abs(rep.mean_error) > rep.bias_bound:
                bad += 1
        return (float(bad), 0.5)

    add("mc_consistency_m2", "Monte Carlo MSE ratio inside 99.9% chi^2 interval", mc_check)

    def riccati_check():
        ident = lambda x: x
        cases = [
            ((1.0, 1, 0.0), 0.05),
            ((3.0, 2, 0.0), 0.05),
            ((1.0, 1, 0.5), 0.15 if quick else 0.10),
            ((1.0, 1, 1.0), 0.05),
        ]
        worst_margin = 0.0
        for (c, n, d), tol in cases:
            spec = asymptotics.RiccatiSpec(c=c, n=n, delta=d, f=ident, x0=1.0)
            limit = asymptotics.predict_limit(spec)
            emp = asymptotics.empirical_limit(spec, k_ric)
            rel = abs(emp - limit.constant) / limit.constant
            worst_margin = max(worst_margin, rel / tol)
        return (worst_margin, 1.0)

    add("riccati_limits", "generic recursion: empirical vs predicted limits", riccati_check)

    def fixed_point_check():
        spec = asymptotics.RiccatiSpec(c=1.0, n=1, delta=1.0, f=lambda x: x, x0=1.0)
        return (abs(asymptotics.fixed_point(spec) - 1.0 / math.sqrt(2.0)), 1e-12)

    add("fixed_point_balance", "balance equation root for C=1,N=1,f=x vs 1/sqrt(2)", fixed_point_check)

    def gaussian_check():
        worst_mean, worst_var = _gaussian_oracle_errors(2000 if quick else 10_000, seed=1)
        return (max(worst_mean, worst_var), 1e-12)

    add("gaussian_oracle", "precision-form update vs direct conditioning", gaussian_check)

    def leading_check():
        rng = np.random.default_rng(7)
        worst = 0.0
        for m in (2, 3, 4):
            for _ in range(5):
                cfg = CascadeConfig(
                    m=m,
                    lambda_e=float(rng.uniform(0.5, 2.0)),
                    lambda_w=tuple(rng.uniform(0.5, 2.0, m - 1)),
                )
                rho = 1e5
                denom = gamma_chain(cfg, rho)[1]
                a = leading_coefficient(cfg)
                worst = max(worst, abs(denom / rho ** (2**m - 2) - a) / a)
        return (worst, 0.01)

    add("leading_coefficient", "denominator leading term matches closed form", leading_check)

    return checks


def cmd_verify(args: argparse.Namespace) -> int:
    defaults = {"quick": None}
    cfg = _merged(args, defaults)
    quick = bool(cfg["quick"])
    checks = _verify_checks(quick)
    t0 = time.perf_counter()
    any_fail = False
    print(f"{'check':<24} {'measure':>12} {'bound':>10}  status")
    for name, _desc, fn in checks:
        measure, bound = fn()
        ok = measure <= bound
        any_fail |= not ok
        print(f"{name:<24} {measure:>12.4g} {bound:>10.4g}  {'PASS' if ok else 'FAIL'}")
    elapsed = time.perf_counter() - t0
    print(f"{len(checks)} checks in {elapsed:.1f}s: {'FAIL' if any_fail else 'PASS'}")
    return 1 if any_fail else 0


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="womkalman",
        description="Word-of-mouth Kalman filter chains: precision dynamics, "
        "convergence rates, and Monte Carlo consistency checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("precision", help="emit a deterministic precision trajectory")
    _add_cascade_flags(p)
    p.add_argument("--kmax", type=int, help="number of steps")
    p.add_argument("--sample", choices=["all", "geometric"], help="recording schedule")
    p.add_argument("--points-per-decade", dest="points_per_decade", type=int)
    _add_output_flags(p)
    p.set_defaults(func=cmd_precision)

    p = sub.add_parser("rate", help="fit growth exponent/constant vs theory")
    _add_cascade_flags(p)
    p.add_argument("--kmax", type=int)
    p.add_argument("--points-per-decade", dest="points_per_decade", type=int)
    p.add_argument("--window-decades", dest="window_decades", type=float,
                   help="fit window size in decades below kmax")
    p.add_argument("--tail-fraction", dest="tail_fraction", type=float)
    _add_output_flags(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("montecarlo", help="stochastic consistency check")
    _add_cascade_flags(p)
    p.add_argument("--kmax", type=int)
    p.add_argument("--paths", type=int, help="number of independent paths")
    p.add_argument("--seed", type=int, help="RNG seed (required)")
    p.add_argument("--theta-bar", dest="theta_bar", type=float, help="prior mean")
    p.add_argument("--checkpoints", type=int, nargs="+", help="report steps")
    _add_output_flags(p)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("riccati", help="generic slow-growth recursion limits")
    p.add_argument("--c", type=float, help="leading coefficient C")
    p.add_argument("--n", type=int, help="leading power N")
    p.add_argument("--delta", type=float, help="time-scaling exponent in [0, 1]")
    p.add_argument("--f", choices=["linear", "affine", "power"], help="f preset")
    p.add_argument("--f-param", dest="f_param", type=float,
                   help="affine offset c (f = c + x) or power exponent p (f = x**p)")
    p.add_argument("--x0", type=float, help="starting value")
    p.add_argument("--kmax", type=int)
    p.add_argument("--tail-fraction", dest="tail_fraction", type=float)
    _add_output_flags(p)
    p.set_defaults(func=cmd_riccati)

    p = sub.add_parser("gaussian-check", help="update-vs-conditioning equivalence")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    _add_output_flags(p)
    p.set_defaults(func=cmd_gaussian_check)

    p = sub.add_parser("verify", help="reduced-scale smoke suite")
    p.add_argument("--quick", action="store_const", const=True,
                   help="smaller runs, finishes in a few seconds")
    p.add_argument("--config", help="JSON file with defaults for any flag")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
