"""Command line interface: ``cppok {pmf,simulate,dispersion,lrd,verify}``.

Exit codes: 0 success, 1 a numerical check failed, 2 usage or config error.
Tabular output is CSV preceded by ``#`` metadata lines (tool version, config
hash, seed); reports are JSON.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from .config import ConfigError, load_config, parse_jump
from .orderk import (
    ENUM_BUDGET,
    _count_compositions,
    OrderKParams,
    cppok_mean,
    cppok_variance,
    dispersion_report,
    pok_pmf,
    pok_pmf_enum,
    sample_cppok_grid,
    classify_gap,
)
from .stats import MonteCarloConfig, fit_power_law, run_ensemble
from .timechange import (
    InverseMtssClock,
    MtssClock,
    TimeChangedSpec,
    sample_z1_grid,
    sample_z2_grid,
    z1_cov,
    z1_dispersion_classify,
    z1_mean,
    z1_variance,
    z2_asymptotics,
)

PMF_TOL = 1e-12


class UsageError(ValueError):
    pass


def _fmt(x, precision=17) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, f".{precision}g")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, default=_jsonable, sort_keys=True)


@contextlib.contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _header(fh, command, digest, seed=None, extra=()):
    fh.write(f"# cppok {__version__}\n# command: {command}\n# config_sha256: {digest}\n")
    if seed is not None:
        fh.write(f"# seed: {seed}\n")
    for line in extra:
        fh.write(f"# {line}\n")


def _args_digest(args, keys):
    blob = json.dumps({k: getattr(args, k) for k in keys}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# pmf


def cmd_pmf(args) -> int:
    params = OrderKParams(args.k, args.lam)
    if args.t < 0:
        raise UsageError("--t must be non-negative")
    table = pok_pmf(params, args.t, args.nmax)
    if args.oracle:
        work = sum(_count_compositions(n, params.k) for n in range(table.nmax + 1))
        if work > ENUM_BUDGET:
            raise UsageError(f"--oracle needs {work} enumeration terms up to n={table.nmax} "
                             f"(budget {ENUM_BUDGET}); lower --nmax")
    p = args.precision
    worst = 0.0
    with _sink(args.output) as fh:
        _header(fh, "pmf", _args_digest(args, ["k", "lam", "t", "nmax", "oracle"]),
                extra=[f"tail_mass: {_fmt(table.tail_mass, p)}"])
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "p_n"] + (["p_n_enum", "abs_diff"] if args.oracle else []))
        for n, pn in enumerate(table.probs):
            row = [n, _fmt(pn, p)]
            if args.oracle:
                ref = pok_pmf_enum(params, args.t, n)
                diff = abs(pn - ref)
                worst = max(worst, diff)
                row += [_fmt(ref, p), _fmt(diff, p)]
            w.writerow(row)
    if args.oracle and worst >= PMF_TOL:
        print(f"cppok: oracle disagreement {worst:.3g} exceeds {PMF_TOL:g}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# simulate


def _sampler_and_theory(cfg):
    params, law, clock = cfg.params, cfg.law, cfg.clock
    if clock is None:
        def sampler(g, n, rng):
            return sample_cppok_grid(params, law, g, n, rng)

        def theory(t):
            return cppok_mean(params, law, t), cppok_variance(params, law, t)

        return sampler, theory, "exact (CPPoK)"
    spec = TimeChangedSpec(params, law, clock)
    if isinstance(clock, MtssClock):
        def sampler(g, n, rng):
            return sample_z1_grid(spec, g, n, rng)

        if not clock.params.tempered:
            warnings.warn("stable clock (mu = 0): moments are infinite, theory columns are nan", stacklevel=2)
            return sampler, lambda t: (math.nan, math.nan), "unavailable (infinite moments)"
        return sampler, lambda t: (z1_mean(spec, t), z1_variance(spec, t)), "exact (Z1 = Z(S(t)))"

    def sampler(g, n, rng):
        return sample_z2_grid(spec, g, n, rng)

    if not clock.params.tempered:
        return sampler, lambda t: (math.nan, math.nan), "unavailable (infinite moments)"

    def theory(t):
        a = z2_asymptotics(spec, t)
        return a.mean, a.variance

    return sampler, theory, "large-t asymptote (Z2 = Z(E(t)))"


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.output is not None:
        cfg.output.path = args.output
    mc = cfg.monte_carlo
    sampler, theory, theory_kind = _sampler_and_theory(cfg)
    summary, samples = run_ensemble(sampler, mc, return_samples=True)
    p = cfg.output.precision
    th = [theory(t) for t in mc.grid]
    with _sink(cfg.output.path) as fh:
        if cfg.output.format == "json":
            fh.write(_dumps({
                "version": __version__, "config_sha256": cfg.digest, "seed": mc.master_seed,
                "replicates": summary.replicates, "grid": summary.grid, "mean": summary.mean,
                "stderr_mean": summary.stderr_mean, "variance": summary.variance,
                "stderr_variance": summary.stderr_variance, "covariance": summary.covariance,
                "theory_kind": theory_kind, "theory_mean": [a for a, _ in th],
                "theory_variance": [b for _, b in th],
            }) + "\n")
            return 0
        _header(fh, "simulate", cfg.digest, mc.master_seed,
                extra=[f"replicates: {mc.replicates}", f"theory: {theory_kind}"])
        w = csv.writer(fh, lineterminator="\n")
        if cfg.output.format == "paths":
            w.writerow(["replicate", "t", "value"])
            for r, row in enumerate(samples):
                for t, v in zip(mc.grid, row):
                    w.writerow([r, _fmt(t, p), _fmt(v, p)])
            return 0
        w.writerow(["t", "mean", "stderr_mean", "variance", "stderr_variance", "theory_mean", "theory_variance"])
        for i, t in enumerate(mc.grid):
            w.writerow([_fmt(t, p), _fmt(summary.mean[i], p), _fmt(summary.stderr_mean[i], p),
                        _fmt(summary.variance[i], p), _fmt(summary.stderr_variance[i], p),
                        _fmt(th[i][0], p), _fmt(th[i][1], p)])
    return 0


# ---------------------------------------------------------------------------
# dispersion


def _process_from_args(args, require_mc=False):
    if args.config:
        return load_config(args.config, require_mc=require_mc)
    if args.k is None or args.lam is None or args.jump is None:
        raise UsageError("give --config or all of --k, --lambda, --jump")
    from .config import ExperimentConfig, OutputSettings

    params = OrderKParams(args.k, args.lam)
    digest = _args_digest(args, ["k", "lam", "jump"])
    return ExperimentConfig(params, parse_jump(args.jump), None, None, OutputSettings(), digest)


def cmd_dispersion(args) -> int:
    cfg = _process_from_args(args)
    t = args.t
    if not t > 0:
        raise UsageError("dispersion index is undefined at t = 0 (0/0)")
    clock = cfg.clock
    exact_possible = clock is None or (isinstance(clock, MtssClock) and clock.params.tempered)
    if args.empirical or not exact_possible:
        if not args.empirical:
            why = ("the inverse clock has no closed-form moments" if isinstance(clock, InverseMtssClock)
                   else "a mu = 0 (stable) clock has infinite mean and variance")
            raise UsageError(f"exact dispersion refused: {why}; rerun with --empirical")
        mc = cfg.monte_carlo
        reps = args.replicates or (mc.replicates if mc else 100_000)
        seed = args.seed if args.seed is not None else (mc.master_seed if mc else 0)
        sampler, _, _ = _sampler_and_theory(cfg)
        summ = run_ensemble(sampler, MonteCarloConfig(reps, seed, [t]))
        gap = summ.variance[0] - summ.mean[0]
        se = math.hypot(summ.stderr_variance[0], summ.stderr_mean[0])
        report = {"t": t, "mode": "empirical", "gap": gap, "stderr_gap": se, "class": classify_gap(gap),
                  "terms": {"mean": summ.mean[0], "variance": summ.variance[0]},
                  "replicates": reps, "seed": seed}
    elif clock is None:
        d = dispersion_report(cfg.params, cfg.law, t)
        m1, v1 = cppok_mean(cfg.params, cfg.law, 1.0), cppok_variance(cfg.params, cfg.law, 1.0)
        report = {"t": t, "mode": "exact", "gap": d.gap, "class": d.kind,
                  "terms": {"E[Z(t)]": d.terms["mean"], "Var[Z(t)]": d.terms["variance"],
                            "E[Z(1)]": m1, "Var[Z(1)]": v1}}
    else:
        d = z1_dispersion_classify(TimeChangedSpec(cfg.params, cfg.law, clock), t)
        report = {"t": t, "mode": "exact", "gap": d.gap, "class": d.kind, "terms": d.terms}
    report["config_sha256"] = cfg.digest
    print(_dumps(report))
    return 0


# ---------------------------------------------------------------------------
# lrd


def _read_corr_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(line for line in fh if not line.startswith("#")):
            try:
                rows.append((float(rec["t"]), float(rec["corr"])))
            except (KeyError, TypeError, ValueError):
                raise UsageError(f"{path}: expected numeric columns 't' and 'corr'") from None
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return np.array(rows).T


def cmd_lrd(args) -> int:
    if args.points < 5:
        raise UsageError("--points must be at least 5 for a power-law fit")
    p = args.precision
    if args.from_csv:
        times, corr = _read_corr_csv(args.from_csv)
        with open(args.from_csv, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        theory = np.full_like(corr, np.nan)
        seed = None
        fit = fit_power_law(times, corr)
    else:
        if not args.config:
            raise UsageError("give --config or --from-csv")
        cfg = load_config(args.config)
        s = args.s
        times = s * np.logspace(math.log10(args.tmin_ratio), math.log10(args.tmax_ratio), args.points)
        grid = np.concatenate([[s], times])
        mc = cfg.monte_carlo
        run_cfg = MonteCarloConfig(mc.replicates, mc.master_seed, grid, mc.workers, mc.block_size)
        sampler, _, _ = _sampler_and_theory(cfg)
        summ = run_ensemble(sampler, run_cfg)
        corr = summ.correlation()[0, 1:]
        theory = _theory_corr(cfg, s, times)
        digest, seed = cfg.digest, mc.master_seed
        fit = fit_power_law(times, corr, (times[0], times[-1]))
    with _sink(args.output) as fh:
        _header(fh, "lrd", digest, seed, extra=[
            f"exponent: {_fmt(fit.exponent, p)}",
            f"intercept: {_fmt(fit.intercept, p)}",
            f"r_squared: {_fmt(fit.r_squared, p)}",
            f"fit_range: {_fmt(fit.fit_range[0], p)} {_fmt(fit.fit_range[1], p)}",
            f"points: {fit.points}",
            f"verdict: {fit.dependence}",
        ])
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "corr", "theory_corr"])
        for t, c, th in zip(times, corr, theory):
            w.writerow([_fmt(t, p), _fmt(c, p), _fmt(th, p)])
    return 0


def _theory_corr(cfg, s, times):
    if cfg.clock is None:
        return np.sqrt(s / times)
    if isinstance(cfg.clock, MtssClock) and cfg.clock.params.tempered:
        spec = TimeChangedSpec(cfg.params, cfg.law, cfg.clock)
        vs = z1_variance(spec, s)
        return np.array([z1_cov(spec, s, t) / math.sqrt(vs * z1_variance(spec, t)) for t in times])
    return np.full(times.shape, np.nan)


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    if args.suite not in SUITES:
        print(f"cppok: unknown suite {args.suite!r}; available: {', '.join(sorted(SUITES))}", file=sys.stderr)
        return 2
    results = run_suite(args.suite, scale=args.scale)
    for r in results:
        print(_dumps({"criterion": r.key, "title": r.title, "passed": r.passed, "elapsed": r.elapsed,
                      "budget": r.budget, "scale": args.scale, "metrics": r.metrics}))
        print(r.line(), file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cppok", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cppok {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pmf = sub.add_parser("pmf", help="pmf of the Poisson distribution of order k")
    pmf.add_argument("--k", type=int, required=True)
    pmf.add_argument("--lambda", dest="lam", type=float, required=True)
    pmf.add_argument("--t", type=float, required=True)
    pmf.add_argument("--nmax", type=int, default=None, help="default: extend until tail mass < 1e-10")
    pmf.add_argument("--oracle", action="store_true", help="cross-check against brute-force enumeration")
    pmf.add_argument("--output", default=None)
    pmf.add_argument("--precision", type=int, default=17)
    pmf.set_defaults(func=cmd_pmf)

    sim = sub.add_parser("simulate", help="Monte Carlo ensemble from a config file")
    sim.add_argument("config")
    sim.add_argument("--output", default=None, help="overrides output.path")
    sim.set_defaults(func=cmd_simulate)

    disp = sub.add_parser("dispersion", help="over/under/equidispersion report")
    disp.add_argument("--config", default=None)
    disp.add_argument("--k", type=int)
    disp.add_argument("--lambda", dest="lam", type=float)
    disp.add_argument("--jump", help="dirac:1 | exponential:MU | discrete:q0,q1,...")
    disp.add_argument("--t", type=float, required=True)
    disp.add_argument("--empirical", action="store_true", help="estimate by simulation instead")
    disp.add_argument("--replicates", type=int, default=None)
    disp.add_argument("--seed", type=int, default=None)
    disp.set_defaults(func=cmd_dispersion)

    lrd = sub.add_parser("lrd", help="correlation decay fit")
    lrd.add_argument("--config", default=None)
    lrd.add_argument("--from-csv", default=None, help="fit a t,corr table instead of simulating")
    lrd.add_argument("--s", type=float, default=1.0, help="fixed earlier time")
    lrd.add_argument("--points", type=int, default=9)
    lrd.add_argument("--tmin-ratio", type=float, default=10.0)
    lrd.add_argument("--tmax-ratio", type=float, default=1000.0)
    lrd.add_argument("--output", default=None)
    lrd.add_argument("--precision", type=int, default=17)
    lrd.set_defaults(func=cmd_lrd)

    ver = sub.add_parser("verify", help="run acceptance suites")
    ver.add_argument("--suite", default="all")
    ver.add_argument("--scale", type=float, default=1.0, help="replicate multiplier; 1 for acceptance")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"cppok: config error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, TypeError) as exc:
        print(f"cppok: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
