"""Command-line entry points: simulation reports, kappa estimation, serving."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from pere import engine
from pere.behavior import generate_user
from pere.data import (
    SQUASH_CHOICES,
    STRATEGY_CHOICES,
    Config,
    load_catalog,
    load_config,
    save_catalog,
    synth_catalog,
)
from pere.dpp import build_ensemble
from pere.errors import CatalogFormatError, ConfigError, PereError
from pere.estimation import ExperienceData, fit_kappa, negative_log_likelihood

log = logging.getLogger("pere.cli")

CSV_COLUMNS = ("strategy", "user_seed", "hr1", "auc10", "ndcg10", "ndcg30",
               "map", "mrr", "rounds", "final_radius")
GRID_POINTS = 50

# Per-process state for the simulation worker pool, installed by
# _init_worker so each task only has to pickle (strategy, user_seed).
_POOL_STATE: dict = {}


def _init_worker(catalog, configs, burn_ins, ensemble):
    _POOL_STATE["catalog"] = catalog
    _POOL_STATE["configs"] = configs
    _POOL_STATE["burn_ins"] = burn_ins
    _POOL_STATE["ensemble"] = ensemble


def _run_one(task):
    strategy, user_seed = task
    catalog = _POOL_STATE["catalog"]
    config = _POOL_STATE["configs"][strategy]
    user = generate_user(catalog, kappa=config.kappa, k_rel=config.k_rel,
                         flip_prob=config.tau, seed=user_seed)
    result = engine.run_experiment(
        catalog, user, config,
        burn_in_items=_POOL_STATE["burn_ins"][strategy],
        ensemble=_POOL_STATE["ensemble"])
    row = {"strategy": strategy, "user_seed": user_seed}
    row.update({k: float(v) for k, v in result.metrics.items()})
    row["rounds"] = result.rounds
    row["final_radius"] = float(result.final_radius)
    return (row, tuple(float(r) for r in result.radius_trace),
            tuple(float(s) for s in result.solve_seconds))


def _aggregate(rows):
    """Mean and standard error per metric column (SE 0 for a single row)."""
    out = {}
    for col in CSV_COLUMNS[2:]:
        vals = np.array([row[col] for row in rows], dtype=float)
        se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        out[col] = {"mean": float(vals.mean()), "se": se}
    return out


def _mean_trace(traces):
    length = min(len(t) for t in traces)
    return [float(np.mean([t[i] for t in traces])) for i in range(length)]


def cmd_simulate(args) -> int:
    base = load_config(args.config) if args.config else Config()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.tau is not None:
        overrides["tau"] = args.tau
    if args.squash is not None:
        overrides["squash"] = args.squash
    if overrides:
        base = dataclasses.replace(base, **overrides)

    catalog = load_catalog(args.catalog)
    base.validate_against(catalog)
    strategies = (tuple(s.strip() for s in args.strategy.split(","))
                  if args.strategy else STRATEGY_CHOICES)
    for s in strategies:
        if s not in STRATEGY_CHOICES:
            raise ConfigError(f"unknown strategy {s!r}; "
                              f"choices: {', '.join(STRATEGY_CHOICES)}")

    configs = {s: dataclasses.replace(base, strategy=s) for s in strategies}
    burn_ins = {}
    for s in strategies:
        plan = engine.plan_for_strategy(s, base.K, base.m, base.T)
        burn_ins[s] = engine.burn_in(catalog, plan.k_burn, base.P,
                                     strategy=plan.burn_strategy,
                                     seed=base.seed)
    ensemble = build_ensemble(catalog.embeddings, catalog.weights, base.P)

    tasks = [(s, u) for s in strategies for u in range(args.users)]
    if args.jobs > 1:
        with ProcessPoolExecutor(
                max_workers=args.jobs, initializer=_init_worker,
                initargs=(catalog, configs, burn_ins, ensemble)) as pool:
            outcomes = list(pool.map(_run_one, tasks))
    else:
        _init_worker(catalog, configs, burn_ins, ensemble)
        outcomes = [_run_one(t) for t in tasks]

    by_task = dict(zip(tasks, outcomes))
    rows, traces, timings = [], {s: [] for s in strategies}, {s: [] for s in strategies}
    for s in strategies:
        for u in range(args.users):
            row, trace, seconds = by_task[(s, u)]
            rows.append(row)
            traces[s].append(trace)
            timings[s].append(seconds)

    report = {
        "config": dataclasses.asdict(base),
        "strategies": list(strategies),
        "users": args.users,
        "rows": rows,
        "aggregates": {s: _aggregate([r for r in rows if r["strategy"] == s])
                       for s in strategies},
        "radius_trace": {s: _mean_trace(traces[s]) for s in strategies},
    }
    del report["config"]["strategy"]
    if args.timings:
        report["timings"] = {
            s: {"mean_solve_seconds": _mean_trace(timings[s])}
            for s in strategies}

    csv_path = args.out + ".csv"
    json_path = args.out + ".json"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v
                         for k, v in row.items()})
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %s and %s (%d rows)", csv_path, json_path, len(rows))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _load_experience(path) -> ExperienceData:
    try:
        with np.load(path) as blob:
            return ExperienceData(
                E=np.asarray(blob["E"], dtype=float),
                distances=np.asarray(blob["distances"], dtype=float),
                weights=np.asarray(blob["weights"], dtype=float),
                dim=int(blob["dim"]),
            )
    except (KeyError, ValueError, OSError) as exc:
        raise ConfigError(f"bad experience file {path}: {exc}") from exc


def cmd_fit_kappa(args) -> int:
    data = _load_experience(args.experience)
    if args.grid:
        for kappa in np.linspace(0.0, args.kappa_max, GRID_POINTS):
            print(f"{float(kappa):.6f} "
                  f"{negative_log_likelihood(data, float(kappa)):.6f}")
    kappa_hat = fit_kappa(data, kappa_max=args.kappa_max, method=args.method)
    print(f"{kappa_hat:.6f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from pere.service import create_app

    catalog = load_catalog(args.catalog) if args.catalog else None
    config = load_config(args.config) if args.config else Config()
    app = create_app(catalog=catalog, config=config)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # uvicorn exits itself on startup failure
        return 1 if exc.code else 0
    return 0


def cmd_synth(args) -> int:
    catalog = synth_catalog(args.n, args.dim, args.clusters, seed=args.seed)
    save_catalog(catalog, args.out)
    print(f"wrote {args.out} ({catalog.n_items} items, d={catalog.dim})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pere",
        description="Two-phase embedding-region preference elicitation.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded simulations, emit CSV+JSON")
    sim.add_argument("--config", help="TOML/JSON config file")
    sim.add_argument("--catalog", required=True, help="catalog CSV")
    sim.add_argument("--users", type=int, default=10)
    sim.add_argument("--seed", type=int, help="override config seed")
    sim.add_argument("--strategy",
                     help="comma-separated subset of: " + ", ".join(STRATEGY_CHOICES))
    sim.add_argument("--tau", type=float, help="override config tau")
    sim.add_argument("--squash", choices=SQUASH_CHOICES,
                     help="override config squash")
    sim.add_argument("--out", default="report", help="output stem (.csv/.json)")
    sim.add_argument("--jobs", type=int, default=1, help="worker processes")
    sim.add_argument("--timings", action="store_true",
                     help="include wall-clock per round (reports stop being "
                          "byte-identical across runs)")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit-kappa", help="estimate kappa from an .npz file "
                                           "with E, distances, weights, dim")
    fit.add_argument("experience", help=".npz experience matrix file")
    fit.add_argument("--grid", action="store_true",
                     help="print NLL on a 50-point kappa grid first")
    fit.add_argument("--kappa-max", type=float, default=20.0)
    fit.add_argument("--method", choices=("golden", "gradient"),
                     default="golden")
    fit.set_defaults(func=cmd_fit_kappa)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--config", help="TOML/JSON config file")
    srv.add_argument("--catalog", help="catalog CSV")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(func=cmd_serve)

    syn = sub.add_parser("synth", help="generate a synthetic catalog CSV")
    syn.add_argument("--n", type=int, default=2000)
    syn.add_argument("--dim", type=int, default=16)
    syn.add_argument("--clusters", type=int, default=8)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("PERE_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CatalogFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PereError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
