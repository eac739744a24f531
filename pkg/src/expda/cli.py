"""Command line: experiment grids, theory-check reports, and matvec benchmarks.

Subcommands
-----------
run
    Execute a (method x tolerance) grid over repeated splits and write a
    CSV table plus a JSON report with per-repeat details and, at oracle
    scale, the theory-check outcomes.
bounds
    Only the theory checks (eigenvalue sandwich, criterion bounds, unit
    eigenvalue count, projected-distance bound) as a JSON report.
bench
    Median matvec wall time across dimensions and kernel backends.

Configuration is a flat key=value file plus command-line overrides; the
flags mirror the file keys.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, bench
from .backend import DEFAULT_BACKEND, available_backends
from .densela import DEFAULT_ORACLE_CAP
from .eda import METHODS, fit_arnoldi_eda, fit_eda_dense
from .exceptions import ConfigError, ExpdaError, IngestError
from .expops import preprocess
from .ingest import SyntheticSpec, ingest_csv, ingest_image_dir, make_synthetic
from .recognize import SplitSpec, evaluate
from .scatter import LabeledDataset, build_scatter, dense_scatter

CSV_COLUMNS = ("method", "t", "tol", "train_per_class", "accuracy_mean",
               "accuracy_std", "fit_seconds", "classify_seconds")


@dataclass
class ExperimentConfig:
    """One experiment grid: dataset source, methods, tolerances, split."""

    data: str | None = None
    synthetic: SyntheticSpec | None = None
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    t: int | None = None
    tolerances: list[float] = field(default_factory=lambda: [1e-4])
    train_per_class: int = 3
    repeats: int = 10
    seed: int = 0
    oracle_cap: int = DEFAULT_ORACLE_CAP
    out: str = "results"
    workers: int = 1

    def validate(self) -> None:
        if not self.methods:
            raise ConfigError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; known: {list(METHODS)}")
        if not self.tolerances:
            raise ConfigError("at least one tolerance is required")
        if any(tol <= 0 for tol in self.tolerances):
            raise ConfigError("tolerances must be positive")
        if self.t is not None and self.t < 1:
            raise ConfigError("t must be >= 1")
        if (self.data is None) == (self.synthetic is None):
            raise ConfigError("exactly one of data path or synthetic spec is required")
        if self.train_per_class < 1 or self.repeats < 1:
            raise ConfigError("train_per_class and repeats must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def parse_synthetic_spec(text: str) -> SyntheticSpec:
    """Parse "d=150,k=6,per_class=5,noise=0.3,scale=1.0,seed=7"."""
    fields = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"bad synthetic field {part!r} (expected key=value)")
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        return SyntheticSpec(
            d=int(fields["d"]),
            k=int(fields["k"]),
            per_class=int(fields["per_class"]),
            noise_scale=float(fields.get("noise", 0.3)),
            centroid_scale=float(fields.get("scale", 1.0)),
            seed=int(fields.get("seed", 0)),
        )
    except KeyError as exc:
        raise ConfigError(f"synthetic spec is missing {exc.args[0]!r} "
                          "(need d, k, per_class)") from None
    except ValueError as exc:
        raise ConfigError(f"bad synthetic spec: {exc}") from None


def parse_config_file(path) -> dict:
    """Flat key = value lines; '#' starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def _config_from_sources(file_values: dict, args) -> ExperimentConfig:
    config = ExperimentConfig()

    def set_field(name, value):
        setattr(config, name, value)

    converters = {
        "data": str,
        "synthetic": parse_synthetic_spec,
        "methods": lambda s: [m.strip() for m in s.split(",") if m.strip()],
        "t": int,
        "tol": lambda s: [float(x) for x in s.replace(",", " ").split()],
        "train_per_class": int,
        "repeats": int,
        "seed": int,
        "oracle_cap": int,
        "out": str,
        "workers": int,
    }
    renames = {"tol": "tolerances"}
    for key, raw in file_values.items():
        if key not in converters:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            set_field(renames.get(key, key), converters[key](raw))
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"config key {key}: {exc}") from None

    if args.data is not None:
        config.data = args.data
    if args.synthetic is not None:
        config.synthetic = parse_synthetic_spec(args.synthetic)
    if args.methods is not None:
        config.methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if args.t is not None:
        config.t = args.t
    if args.tol:
        config.tolerances = list(args.tol)
    if args.train_per_class is not None:
        config.train_per_class = args.train_per_class
    if args.repeats is not None:
        config.repeats = args.repeats
    if args.seed is not None:
        config.seed = args.seed
    if args.oracle_cap is not None:
        config.oracle_cap = args.oracle_cap
    if args.out is not None:
        config.out = args.out
    if getattr(args, "workers", None) is not None:
        config.workers = args.workers
    return config


def load_dataset(config: ExperimentConfig) -> LabeledDataset:
    if config.data is not None:
        path = Path(config.data)
        if path.is_dir():
            return ingest_image_dir(path)
        return ingest_csv(path)
    return make_synthetic(config.synthetic)


def theory_report(ds: LabeledDataset, t: int, tolerances, oracle_cap: int,
                  seed: int = 0) -> dict:
    """Check outcomes for the eigenvalue, criterion, unit-count, and
    projected-distance theory on this dataset."""
    sp = build_scatter(ds)
    factors = preprocess(sp)
    s = analysis.spectrum_summary(sp, factors=factors)
    d, n = ds.dim, ds.n_samples
    report: dict = {"d": d, "n": n, "t": t}

    lows = np.array([analysis.eig_bounds(s, i)[0] for i in range(1, d + 1)])
    ups = np.array([analysis.eig_bounds(s, i)[1] for i in range(1, d + 1)])
    report["eig_bounds_hold"] = bool(
        np.all(lows - 1e-8 <= s.lambda_m) and np.all(s.lambda_m <= ups + 1e-8))

    smin = float(np.linalg.svd(ds.data, compute_uv=False)[-1]) if n <= d else 0.0
    independent = smin > 1e-8
    count = analysis.count_unit_eigs(s)
    report["unit_eigs"] = {
        "count": count,
        "required": d - n + 1,
        "samples_independent": independent,
        "holds": bool(count >= d - n + 1) if independent else None,
    }

    lo, up = analysis.criterion_bounds(s, t, "eda")
    rho = analysis.eda_optimum(s, t)
    slack = 1e-8 * max(1.0, abs(rho))
    report["eda_criterion"] = {
        "lower": lo, "upper": up, "optimum": rho,
        "holds": bool(lo - slack <= rho <= up + slack),
    }

    try:
        lo, up = analysis.criterion_bounds(s, t, "lda")
        s_w, s_b = dense_scatter(sp, oracle_cap)
        varrho = analysis.lda_optimum(s_w, s_b, t)
        slack = 1e-8 * max(1.0, abs(varrho))
        report["lda_criterion"] = {
            "lower": lo, "upper": up, "optimum": varrho,
            "holds": bool(lo - slack <= varrho <= up + slack),
        }
    except ExpdaError as exc:
        report["lda_criterion"] = {"holds": None, "reason": str(exc)}

    v_dense = fit_eda_dense(ds, t, oracle_cap=oracle_cap)
    checks = []
    limit = min(n, 150)
    projected_exact = v_dense.v.T @ ds.data[:, :limit]
    for tol in tolerances:
        v_tilde = fit_arnoldi_eda(ds, t, tol=tol, seed=seed)
        ang = analysis.subspace_angle(v_dense, v_tilde)
        projected_tilde = v_tilde.v.T @ ds.data[:, :limit]
        holds = True
        for i in range(limit):
            d_exact = np.linalg.norm(projected_exact - projected_exact[:, i][:, None], axis=0)
            d_tilde = np.linalg.norm(projected_tilde - projected_tilde[:, i][:, None], axis=0)
            slack = 1e-12 * np.maximum(1.0, np.maximum(d_exact, d_tilde))
            lower = (d_tilde - 2.0 * ang.sin_angle) / ang.cos_angle
            upper = d_tilde * ang.cos_angle + 2.0 * ang.sin_angle
            if not (np.all(lower - slack <= d_exact) and np.all(d_exact <= upper + slack)):
                holds = False
                break
        checks.append({"tol": tol, "sin_angle": ang.sin_angle,
                       "cos_angle": ang.cos_angle, "holds": holds})
    report["distance_bound"] = checks
    return report


def _config_echo(config: ExperimentConfig) -> dict:
    echo = dataclasses.asdict(config)
    if config.synthetic is not None:
        echo["synthetic"] = dataclasses.asdict(config.synthetic)
    return echo


def run_experiments(config: ExperimentConfig) -> int:
    """Execute the grid, write <out>.csv and <out>.json, return exit code."""
    config.validate()
    ds = load_dataset(config)
    t = config.t if config.t is not None else ds.n_classes - 1
    if t < 1:
        raise ConfigError(f"default t = k - 1 = {t} is invalid for this dataset")
    split_spec = SplitSpec(config.train_per_class, config.seed, config.repeats)
    cells = [(method, tol) for method in config.methods
             for tol in config.tolerances]

    def run_cell(cell):
        method, tol = cell
        return evaluate(ds, method, t, tol, split_spec,
                        oracle_cap=config.oracle_cap)

    results: dict = {}
    errors: dict = {}
    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
            futures = {pool.submit(run_cell, cell): cell for cell in cells}
            for future in concurrent.futures.as_completed(futures):
                cell = futures[future]
                try:
                    results[cell] = future.result()
                except Exception as exc:
                    errors[cell] = f"{type(exc).__name__}: {exc}"
    else:
        for cell in cells:
            try:
                results[cell] = run_cell(cell)
            except Exception as exc:
                errors[cell] = f"{type(exc).__name__}: {exc}"

    rows = []
    cell_reports = []
    for cell in cells:
        method, tol = cell
        entry = {"method": method, "t": t, "tol": tol,
                 "train_per_class": config.train_per_class}
        if cell in results:
            rep = results[cell]
            rows.append([method, str(t), f"{tol:g}", str(config.train_per_class),
                         f"{rep.accuracy:.3f}", f"{rep.accuracy_std:.3f}",
                         f"{rep.fit_seconds:.6f}", f"{rep.classify_seconds:.6f}"])
            entry.update({
                "accuracy_mean": rep.accuracy,
                "accuracy_std": rep.accuracy_std,
                "fit_seconds": rep.fit_seconds,
                "classify_seconds": rep.classify_seconds,
                "per_repeat_accuracy": rep.per_repeat_accuracy,
            })
        else:
            entry["error"] = errors[cell]
        cell_reports.append(entry)

    report = {"config": _config_echo(config), "cells": cell_reports}
    if ds.dim <= config.oracle_cap:
        try:
            report["theory"] = theory_report(ds, t, config.tolerances,
                                             config.oracle_cap, config.seed)
        except Exception as exc:
            report["theory"] = {"error": f"{type(exc).__name__}: {exc}"}
    else:
        report["theory"] = {
            "skipped": f"d={ds.dim} above oracle cap {config.oracle_cap}"}

    out = Path(config.out)
    try:
        with open(out.with_suffix(".csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            writer.writerows(rows)
        with open(out.with_suffix(".json"), "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"error: cannot write reports: {exc}", file=sys.stderr)
        return 3
    if errors:
        for cell, message in errors.items():
            print(f"cell {cell} failed: {message}", file=sys.stderr)
        return 2
    return 0


def _cmd_run(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    config = _config_from_sources(file_values, args)
    return run_experiments(config)


def _cmd_bounds(args) -> int:
    config = ExperimentConfig(
        data=args.data,
        synthetic=parse_synthetic_spec(args.synthetic) if args.synthetic else None,
        tolerances=args.tol or [1e-4],
        seed=args.seed or 0,
        oracle_cap=args.oracle_cap or DEFAULT_ORACLE_CAP,
    )
    if (config.data is None) == (config.synthetic is None):
        raise ConfigError("exactly one of --data or --synthetic is required")
    ds = load_dataset(config)
    t = args.t if args.t is not None else ds.n_classes - 1
    if ds.dim > config.oracle_cap:
        raise ConfigError(f"bounds report needs d <= oracle cap "
                          f"({ds.dim} > {config.oracle_cap})")
    report = theory_report(ds, t, config.tolerances, config.oracle_cap,
                           config.seed)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench(args) -> int:
    dims = args.d or list(bench.DEFAULT_DIMS)
    backends = available_backends() if args.backend == "all" else [args.backend]
    rows = bench.scaling_table(dims=dims, n=args.n, k=args.k,
                               backends=backends, samples=args.samples)
    ratios = bench.doubling_ratios(rows)
    print(f"{'backend':>9} {'mode':>13} {'d':>8} {'median_ms':>11}")
    for row in rows:
        print(f"{row['backend']:>9} {row['mode']:>13} {row['d']:>8} "
              f"{row['median_seconds'] * 1e3:>11.4f}")
    print()
    print(f"{'backend':>9} {'mode':>13} {'d_from':>8} {'d_to':>8} {'time_ratio':>11}")
    for ratio in ratios:
        print(f"{ratio['backend']:>9} {ratio['mode']:>13} {ratio['d_from']:>8} "
              f"{ratio['d_to']:>8} {ratio['time_ratio']:>11.3f}")
    if args.out:
        try:
            Path(args.out).write_text(
                json.dumps({"rows": rows, "ratios": ratios}, indent=2) + "\n")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expda",
        description="Exponential discriminant analysis experiments, theory "
                    "checks, and matvec benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a (method x tolerance) grid")
    run.add_argument("--config", help="flat key=value config file")
    run.add_argument("--data", help="CSV file or PGM class-directory root")
    run.add_argument("--synthetic", help="d=..,k=..,per_class=..[,noise=..,scale=..,seed=..]")
    run.add_argument("--methods", help=f"comma list from {','.join(METHODS)}")
    run.add_argument("--t", type=int, help="projection dimension (default k-1)")
    run.add_argument("--tol", action="append", type=float,
                     help="solver tolerance (repeatable)")
    run.add_argument("--train-per-class", type=int, dest="train_per_class")
    run.add_argument("--repeats", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--oracle-cap", type=int, dest="oracle_cap")
    run.add_argument("--out", help="output basename for .csv/.json reports")
    run.add_argument("--workers", type=int, help="concurrent grid cells")

    bounds = sub.add_parser("bounds", help="theory-check report only")
    bounds.add_argument("--data")
    bounds.add_argument("--synthetic")
    bounds.add_argument("--t", type=int)
    bounds.add_argument("--tol", action="append", type=float)
    bounds.add_argument("--seed", type=int)
    bounds.add_argument("--oracle-cap", type=int, dest="oracle_cap")
    bounds.add_argument("--out")

    bench_p = sub.add_parser("bench", help="matvec scaling measurement")
    bench_p.add_argument("--d", action="append", type=int,
                         help="dimension (repeatable; default 10k 20k 40k)")
    bench_p.add_argument("--n", type=int, default=30)
    bench_p.add_argument("--k", type=int, default=6)
    bench_p.add_argument("--samples", type=int, default=64)
    bench_p.add_argument("--backend", default="all",
                         choices=["all"] + available_backends())
    bench_p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "bounds": _cmd_bounds, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except IngestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
