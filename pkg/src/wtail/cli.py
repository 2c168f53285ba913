"""The ``wtail`` command.

Subcommands:

* ``curves``      run curve experiments from a config file; writes one CSV
                  (and one rendered figure) per (model, n);
* ``tables``      run the optimal-level comparison grid; writes the three
                  tables as CSVs plus pretty text companions;
* ``asymptotics`` closed-form AMSE / optimal-exponent calculator;
* ``selftest``    fast built-in consistency checks.

Exit codes: 0 success, 2 configuration/usage error, 3 degenerate run.
Worker count resolution: --workers flag, then the WTAIL_WORKERS
environment variable, then the config [defaults], then 1.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import AmseInput, amse, optimal_p, variance_factor
from .config import (
    DEFAULT_N_GRID,
    TablesJob,
    menu_for,
    parse_config,
    ParsedConfig,
)
from .core import EstimatorSpec, Family, hill, hp, pm, t_seq_g, wtc, wtc_curve
from .engine import ExperimentConfig, optimal_level, run_experiment
from .errors import (
    ConfigError,
    DegenerateRunError,
    DegenerateSampleError,
    WtailError,
)
from .models import MODEL_IDS, SecondOrder, SeededStream, get_model, sample
from .reporting import (
    slug,
    write_curves_csv,
    write_manifest,
    write_pretty_table,
    write_table_csv,
)

logger = logging.getLogger("wtail.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

DEFAULT_SEED = 987654321
DEFAULT_REPLICATIONS = 5000


def _add_run_flags(sub: argparse.ArgumentParser, config_required: bool) -> None:
    sub.add_argument("--config", required=config_required, help="configuration file")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--seed", type=int, default=None, help="experiment seed (64-bit)")
    sub.add_argument(
        "--replications", type=int, default=None,
        help=f"replications per experiment (default {DEFAULT_REPLICATIONS})",
    )
    sub.add_argument("--workers", type=int, default=None, help="worker processes")
    sub.add_argument("--digits", type=int, default=None,
                     help="decimal digits in pretty tables (default 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wtail",
        description="Weibull tail-coefficient estimators and their Monte-Carlo comparison",
    )
    parser.add_argument("--version", action="version", version=f"wtail {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_curves = subs.add_parser("curves", help="per-k mean/RMSE curve experiments")
    _add_run_flags(p_curves, config_required=True)
    p_curves.add_argument("--no-plot", action="store_true",
                          help="emit CSV data only, skip figure rendering")
    p_curves.set_defaults(func=cmd_curves)

    p_tables = subs.add_parser("tables", help="optimal-level comparison tables")
    _add_run_flags(p_tables, config_required=False)
    p_tables.set_defaults(func=cmd_tables)

    p_asy = subs.add_parser("asymptotics", help="closed-form AMSE calculator")
    p_asy.add_argument("--family", required=True,
                       choices=[f.value for f in Family])
    p_asy.add_argument("--theta", type=float, required=True)
    cls = p_asy.add_mutually_exclusive_group()
    cls.add_argument("--alpha", type=float, default=None,
                     help="slow-variation constant of an alpha/t model")
    cls.add_argument("--b0", action="store_true",
                     help="model with a vanishing second-order rate function")
    p_asy.add_argument("--p", type=float, default=None)
    p_asy.add_argument("--n", type=int, default=None)
    p_asy.add_argument("--k", type=int, default=None)
    p_asy.add_argument("--optimal-p", action="store_true",
                       help="report the bias-cancelling exponent instead of the AMSE")
    p_asy.add_argument("--out", default=None, help="also write the CSV to DIR")
    p_asy.set_defaults(func=cmd_asymptotics)

    p_self = subs.add_parser("selftest", help="fast built-in consistency checks")
    p_self.add_argument("--workers", type=int, default=None)
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"wtail: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateRunError, DegenerateSampleError) as exc:
        print(f"wtail: degenerate run: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


# ---------------------------------------------------------------------------
# settings resolution and shared plumbing
# ---------------------------------------------------------------------------

def _resolve_workers(args, parsed: ParsedConfig | None) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("WTAIL_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"WTAIL_WORKERS must be an integer, got {env!r}")
    if parsed is not None and parsed.workers is not None:
        return max(1, parsed.workers)
    return 1


def _resolve_seed(args, parsed: ParsedConfig | None) -> int:
    if args.seed is not None:
        return args.seed
    if parsed is not None and parsed.seed is not None:
        return parsed.seed
    return DEFAULT_SEED


def _resolve_replications(args, parsed, job_value) -> int:
    for candidate in (args.replications, job_value,
                      parsed.replications if parsed else None):
        if candidate is not None:
            if candidate < 1:
                raise ConfigError(f"replications must be >= 1, got {candidate}")
            return candidate
    return DEFAULT_REPLICATIONS


def _resolve_digits(args, parsed: ParsedConfig | None) -> int:
    if args.digits is not None:
        return args.digits
    if parsed is not None and parsed.digits is not None:
        return parsed.digits
    return 4


def _progress_logger(label: str):
    state = {"last": -1}

    def cb(done: int, total: int):
        decile = 10 * done // total
        if decile != state["last"] or done == total:
            state["last"] = decile
            logger.info("%s: %d/%d replications", label, done, total)

    return cb


def _estimator_list_text(specs) -> str:
    return ", ".join(s.label for s in dict.fromkeys(specs))


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def _curves_echo(seed: int, workers: int, digits: int, jobs: list) -> str:
    lines = ["[defaults]", f"seed = {seed}", f"workers = {workers}",
             f"digits = {digits}", ""]
    for job, reps in jobs:
        lines += [
            f"[curves:{job.name}]",
            f"model = {job.model.id}",
            f"n = {job.n}",
            f"estimators = {_estimator_list_text(job.estimators)}",
            f"replications = {reps}",
        ]
        if job.k_range is not None:
            lines += [f"k_min = {job.k_range[0]}", f"k_max = {job.k_range[1]}"]
        lines.append("")
    return "\n".join(lines)


def cmd_curves(args) -> int:
    parsed = parse_config(args.config)
    if not parsed.curves:
        raise ConfigError("no [curves:<name>] sections found", parsed.path)
    seed = _resolve_seed(args, parsed)
    workers = _resolve_workers(args, parsed)
    digits = _resolve_digits(args, parsed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    outputs: list[str] = []
    resolved_jobs = []
    total_reps = 0
    for job in parsed.curves:
        reps = _resolve_replications(args, parsed, job.replications)
        resolved_jobs.append((job, reps))
        total_reps += reps
        cfg = ExperimentConfig(
            model=job.model, n=job.n, replications=reps,
            estimators=job.estimators, experiment_seed=seed,
            k_range=job.k_range,
        )
        curves = run_experiment(cfg, workers=workers,
                                progress=_progress_logger(job.name))
        base = f"curves_{slug(job.model.id)}_n{job.n}"
        csv_path = out_dir / f"{base}.csv"
        write_curves_csv(csv_path, job.estimators, curves)
        outputs.append(csv_path.name)
        if not args.no_plot:
            from .plotting import render_curves_figure

            png_path = out_dir / f"{base}.png"
            render_curves_figure(
                png_path, job.estimators, curves, job.model.theta,
                title=f"{job.model.id}, n={job.n}, R={reps}",
            )
            outputs.append(png_path.name)

    write_manifest(
        out_dir, "curves", seed, total_reps, workers,
        time.perf_counter() - t0,
        _curves_echo(seed, workers, digits, resolved_jobs),
        outputs,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def _tables_echo(seed: int, workers: int, digits: int, job: TablesJob, reps: int) -> str:
    lines = ["[defaults]", f"seed = {seed}", f"workers = {workers}",
             f"digits = {digits}", "", "[tables]",
             f"models = {', '.join(m.id for m in job.models)}",
             f"n_grid = {', '.join(str(n) for n in job.n_grid)}",
             f"replications = {reps}"]
    for model in job.models:
        lines.append(
            f"estimators.{model.id} = {_estimator_list_text(job.menu[model.id])}"
        )
    lines.append("")
    return "\n".join(lines)


def _default_tables_job() -> TablesJob:
    models = tuple(get_model(mid) for mid in MODEL_IDS if mid != "logistic")
    return TablesJob(models=models, n_grid=DEFAULT_N_GRID,
                     menu={m.id: menu_for(m) for m in models})


def cmd_tables(args) -> int:
    parsed = parse_config(args.config) if args.config else None
    job = parsed.tables if parsed and parsed.tables else _default_tables_job()
    seed = _resolve_seed(args, parsed)
    workers = _resolve_workers(args, parsed)
    digits = _resolve_digits(args, parsed)
    reps = _resolve_replications(args, parsed, job.replications)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    rows = []
    for model in job.models:
        menu = job.menu[model.id]
        by_spec: dict[EstimatorSpec, dict[int, object]] = {s: {} for s in menu}
        for n in job.n_grid:
            cfg = ExperimentConfig(
                model=model, n=n, replications=reps,
                estimators=menu, experiment_seed=seed,
            )
            curves = run_experiment(
                cfg, workers=workers,
                progress=_progress_logger(f"{model.id} n={n}"),
            )
            for spec in dict.fromkeys(menu):
                by_spec[spec][n] = optimal_level(curves[spec], replications=reps)
        for spec in dict.fromkeys(menu):
            rows.append((model.id, spec, by_spec[spec]))

    outputs = []
    titles = {
        "mean": "Simulated mean value at the simulated optimal level",
        "rmse": "Simulated RMSE at the simulated optimal level",
        "osf": "Simulated optimal sample fraction",
    }
    for idx, value in enumerate(("mean", "rmse", "osf"), start=1):
        csv_path = out_dir / f"table{idx}_{value}.csv"
        write_table_csv(csv_path, job.n_grid, rows, value)
        outputs.append(csv_path.name)
        txt_path = out_dir / f"table{idx}_{value}.txt"
        write_pretty_table(txt_path, titles[value], job.n_grid, rows, value, digits)
        outputs.append(txt_path.name)

    write_manifest(
        out_dir, "tables", seed, reps, workers,
        time.perf_counter() - t0,
        _tables_echo(seed, workers, digits, job, reps),
        outputs,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

def cmd_asymptotics(args) -> int:
    family = Family(args.family)
    lines = []
    if args.optimal_p:
        if args.alpha is None:
            raise ConfigError("--optimal-p needs --alpha (an alpha/t model)")
        value = optimal_p(family, args.alpha, args.theta)
        lines.append("family,theta,alpha,p_opt")
        cell = "infeasible" if value is None else f"{value:.17g}"
        lines.append(f"{family.value},{args.theta:.17g},{args.alpha:.17g},{cell}")
    else:
        missing = [name for name in ("p", "n", "k") if getattr(args, name) is None]
        if args.alpha is None and not args.b0:
            missing.append("alpha|b0")
        if missing:
            raise ConfigError(
                "AMSE evaluation needs --p, --n, --k and one of --alpha/--b0 "
                f"(missing: {', '.join(missing)})"
            )
        second = SecondOrder.B_ZERO if args.b0 else SecondOrder.B_ALPHA_OVER_T
        try:
            report = amse(AmseInput(
                family=family, p=args.p, theta=args.theta, n=args.n, k=args.k,
                second_order=second, alpha=args.alpha,
            ))
        except WtailError as exc:
            raise ConfigError(str(exc)) from exc
        lines.append("family,p,theta,alpha,n,k,bias_sq,variance,amse")
        alpha_cell = "" if args.alpha is None else f"{args.alpha:.17g}"
        lines.append(
            f"{family.value},{args.p:.17g},{args.theta:.17g},{alpha_cell},"
            f"{args.n},{args.k},{report.bias_sq:.17g},{report.variance:.17g},"
            f"{report.amse:.17g}"
        )
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "asymptotics.csv").write_text(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    workers = args.workers if args.workers is not None else 1
    failures = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        if ok:
            print(f"ok - {name}")
        else:
            failures += 1
            print(f"FAIL - {name}{': ' + detail if detail else ''}")

    model = get_model("exponential")
    s = sample(model, 200, SeededStream(20260810, 0))
    n = s.n

    worst = 0.0
    for k in (1, 5, 50, 150, n - 1):
        worst = max(
            worst,
            abs(pm(s, k, 1.0) - hill(s, k)),
            abs(hp(s, k, 0.0) - hill(s, k)),
            abs(wtc(s, k, EstimatorSpec(Family.TILDE_GG, 1.0))
                - wtc(s, k, EstimatorSpec(Family.HAT_GG, 0.0))),
            abs(wtc(s, k, EstimatorSpec(Family.TILDE_GG, 1.0))
                - math.log(n / k) * hill(s, k)),
            abs(wtc(s, k, EstimatorSpec(Family.TILDE_G, 1.0))
                - wtc(s, k, EstimatorSpec(Family.HAT_G, 0.0))),
        )
    check("identity web (pm/hp/tilde/hat reductions)", worst <= 1e-12, f"worst={worst:g}")

    spec = EstimatorSpec(Family.HAT_G, -2.0)
    scaled = s.scaled(37.5)
    dev = max(abs(wtc(s, k, spec) - wtc(scaled, k, spec)) for k in (3, 77, 180))
    check("scale invariance", dev <= 1e-10, f"dev={dev:g}")

    worst = 0.0
    for fam in Family:
        for p in (-2.0, 0.25, 2.0):
            if fam.is_tilde and p <= -1:
                continue
            sp = EstimatorSpec(fam, p)
            curve = wtc_curve(s, sp)
            naive = np.array([wtc(s, k, sp) for k in range(1, n)])
            denom = np.maximum(np.abs(naive), 1e-300)
            worst = max(worst, float(np.nanmax(np.abs(curve - naive) / denom)))
    check("curve vs per-k recomputation (rel 1e-9)", worst <= 1e-9, f"worst={worst:g}")

    check("t-sequence positivity", all(t_seq_g(200, k) > 0 for k in range(1, 200)))

    check("variance factor v(1)=1, v(2)=1.25",
          variance_factor(Family.TILDE_G, 1.0) == 1.0
          and abs(variance_factor(Family.TILDE_G, 2.0) - 1.25) <= 1e-15)

    gum = get_model("gumbel(mu=-1)")
    ok_popt = (
        optimal_p(Family.TILDE_GG, gum.alpha, gum.theta) == 1.0
        and optimal_p(Family.TILDE_G, gum.alpha, gum.theta) == 3.0
        and optimal_p(Family.TILDE_GG, get_model("logistic").alpha, 1.0) is None
        and optimal_p(Family.TILDE_G, get_model("logistic").alpha, 1.0) is None
    )
    check("optimal exponents (gumbel mu=-1 and logistic)", ok_popt)

    cfg = ExperimentConfig(
        model=model, n=60, replications=52,
        estimators=(EstimatorSpec(Family.TILDE_G, 1.0),),
        experiment_seed=31415,
    )
    one = run_experiment(cfg, workers=1)
    multi = run_experiment(cfg, workers=max(2, workers))
    spec = cfg.estimators[0]
    same = (
        one[spec].mean.tobytes() == multi[spec].mean.tobytes()
        and one[spec].rmse.tobytes() == multi[spec].rmse.tobytes()
    )
    check("worker-count invariance (bitwise)", same)

    print(f"selftest: {'PASS' if failures == 0 else 'FAIL'} "
          f"({failures} failing check(s))")
    return EXIT_OK if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
