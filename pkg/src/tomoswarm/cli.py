"""Command line front end.

Subcommands:
  evaluate  score a fixed formation (file or reference array) and dump
            PSF curves, metrics, constraints, powers, and SNRs as CSV
  optimize  run one optimizer seed and dump result, history, winning
            formation, and powers
  sweep     repeat optimize over a parameter grid, algorithms, and seeds,
            and dump per-cell plus per-seed-median tables

Exit codes: 0 success, 2 validation problem (bad flags, bad config or
formation content, empty sweep values), 3 I/O problem (unreadable or
missing files). Outputs are byte-identical across reruns with the same
inputs; set TOMOSWARM_WORKERS to parallelize sweep cells.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .constraints import (evaluate_constraints, resolution_cell_area,
                          total_violation, write_constraints_csv)
from .geometry import Formation, MissionTimeline
from .link_budget import (allocate_min_power, radar_snr_table, write_power_csv,
                          write_snr_csv)
from .optimizers import (ALGORITHMS, default_budget, override_budget,
                         run_algorithm, ula_formation)
from .psf import evaluate_psf, tomo_metrics, write_psf_csv
from .scenario import (ConfigError, ScenarioConfig, default_reference_config,
                       load_config, with_h_max, with_rate_min)

SWEEP_PARAMS = {"h_max": with_h_max, "R_min": with_rate_min}


def _load(args) -> ScenarioConfig:
    if args.config is None:
        return default_reference_config()
    return load_config(args.config)


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def read_formation_csv(path) -> Formation:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "uav,x,z":
            raise ConfigError(f"formation file: expected header 'uav,x,z', got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ConfigError("formation file: expected 3 columns per row")
            rows.append((float(parts[1]), float(parts[2])))
    if not rows:
        raise ConfigError("formation file: no platforms listed")
    return Formation(np.array(rows))


def write_formation_csv(formation: Formation, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("uav,x,z\n")
        for i, (x, z) in enumerate(formation.positions):
            fh.write(f"{i},{float(x)!r},{float(z)!r}\n")


def _fmt_metric(value, fmt):
    return "NOT_FOUND" if value is None else format(value, fmt)


def cmd_evaluate(args) -> int:
    cfg = _load(args)
    if args.ula is not None:
        formation = ula_formation(cfg, args.ula, args.ula_orientation)
    else:
        formation = read_formation_csv(args.formation)
    if formation.num_uavs != cfg.num_uavs:
        raise ConfigError("formation file: platform count does not match num_uavs")
    out = _outdir(args.out)
    timeline = MissionTimeline.from_config(cfg)
    curve_n = evaluate_psf(formation, cfg, "elevation")
    curve_r = evaluate_psf(formation, cfg, "slant")
    metrics = tomo_metrics(formation, cfg)
    allocation = allocate_min_power(formation, timeline, cfg)
    report = evaluate_constraints(formation, metrics, allocation, cfg)
    snr = radar_snr_table(formation, cfg, resolution_cell_area(metrics, cfg))

    write_psf_csv(curve_n, os.path.join(out, "psf_n.csv"), cfg.numerics.db_reference)
    write_psf_csv(curve_r, os.path.join(out, "psf_r.csv"), cfg.numerics.db_reference)
    write_constraints_csv(report, os.path.join(out, "constraints.csv"))
    write_power_csv(allocation.eta, os.path.join(out, "power.csv"))
    write_snr_csv(snr, os.path.join(out, "snr.csv"))
    with open(os.path.join(out, "metrics.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("metric,value\n")
        fh.write(f"delta_n,{_fmt_metric(metrics.delta_n, '.6f')}\n")
        fh.write(f"delta_r,{_fmt_metric(metrics.delta_r, '.6f')}\n")
        fh.write(f"psl_linear,{metrics.psl_linear:.12e}\n")
        fh.write(f"psl_db,{metrics.psl_db:.4f}\n")
        fh.write(f"mainlobe_peak,{metrics.mainlobe_peak:.12e}\n")
        fh.write(f"feasible,{'true' if report.feasible else 'false'}\n")
        fh.write(f"total_violation,{total_violation(report):.12e}\n")
    return 0


def _result_rows(result, budget):
    return [
        ("algorithm", result.algorithm, result.algorithm),
        ("seed", str(result.seed), str(result.seed)),
        ("iterations", str(budget.iterations), str(budget.iterations)),
        ("population", str(budget.population), str(budget.population)),
        ("c1", f"{budget.c1:g}", repr(budget.c1)),
        ("c2", f"{budget.c2:g}", repr(budget.c2)),
        ("v_max", f"{budget.v_max:g}", repr(budget.v_max)),
        ("feasible", "true" if result.feasible else "false",
         "true" if result.feasible else "false"),
        ("psl_db", f"{result.best_psl_db:.4f}", repr(result.best_psl_db)),
        ("psl_linear", f"{result.best_psl_linear:.6e}", repr(result.best_psl_linear)),
        ("total_violation", f"{total_violation(result.report):.6e}",
         repr(total_violation(result.report))),
    ]


def cmd_optimize(args) -> int:
    cfg = _load(args)
    budget = override_budget(default_budget(args.algorithm),
                             args.iterations, args.population)
    result = run_algorithm(args.algorithm, cfg, seed=args.seed, budget=budget)
    out = _outdir(args.out)
    with open(os.path.join(out, "result.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("key,value\n")
        for key, val, _ in _result_rows(result, budget):
            fh.write(f"{key},{val}\n")
    with open(os.path.join(out, "result_raw.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("key,value\n")
        for key, _, raw in _result_rows(result, budget):
            fh.write(f"{key},{raw}\n")
    with open(os.path.join(out, "history.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("iteration,best_fitness,best_psl_db,feasible_count\n")
        for row in result.history:
            fh.write(f"{row.iteration},{row.best_fitness!r},"
                     f"{row.best_psl_db:.4f},{row.feasible_count}\n")
    write_formation_csv(result.best_formation, os.path.join(out, "best_formation.csv"))
    write_power_csv(result.allocation.eta, os.path.join(out, "power.csv"))
    return 0


def _sweep_cell(job):
    cfg, param, value, algorithm, seed, iterations, population = job
    variant = SWEEP_PARAMS[param](cfg, value)
    budget = override_budget(default_budget(algorithm), iterations, population)
    result = run_algorithm(algorithm, variant, seed=seed, budget=budget)
    return (value, algorithm, seed, result.best_psl_db, result.feasible)


def _median_psl(cells):
    # Middle element with infeasible runs pushed to +inf; no averaging, so
    # an infeasible median stays reportable as such.
    scored = sorted(math.inf if not feas else psl for psl, feas in cells)
    mid = scored[len(scored) // 2]
    return mid


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.sweep_values.strip() == "":
        raise ConfigError("sweep-values: no values given")
    values = [float(tok) for tok in args.sweep_values.split(",") if tok.strip()]
    if not values:
        raise ConfigError("sweep-values: no values given")
    algorithms = [tok.strip() for tok in args.algorithms.split(",") if tok.strip()]
    if not algorithms:
        raise ConfigError("algorithms: no names given")
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ConfigError(f"algorithms: unknown name {name!r}")
    seeds = [int(tok) for tok in args.seeds.split(",") if tok.strip()]
    if not seeds:
        raise ConfigError("seeds: no values given")

    jobs = [(cfg, args.sweep_param, value, algorithm, seed,
             args.iterations, args.population)
            for value in values for algorithm in algorithms for seed in seeds]
    workers = int(os.environ.get("TOMOSWARM_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    else:
        rows = [_sweep_cell(job) for job in jobs]

    out = _outdir(args.out)
    with open(os.path.join(out, "sweep.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("value,algorithm,seed,psl_db,feasible\n")
        for value, algorithm, seed, psl, feas in rows:
            token = f"{psl:.4f}" if feas else "INFEASIBLE"
            fh.write(f"{value!r},{algorithm},{seed},{token},"
                     f"{'true' if feas else 'false'}\n")
    with open(os.path.join(out, "sweep_raw.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("value,algorithm,seed,psl_db,feasible\n")
        for value, algorithm, seed, psl, feas in rows:
            fh.write(f"{value!r},{algorithm},{seed},{psl!r},"
                     f"{'true' if feas else 'false'}\n")
    with open(os.path.join(out, "sweep_median.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("value,algorithm,median_psl_db\n")
        for value in values:
            for algorithm in algorithms:
                cells = [(psl, feas) for v, a, _, psl, feas in rows
                         if v == value and a == algorithm]
                med = _median_psl(cells)
                token = "INFEASIBLE" if math.isinf(med) else f"{med:.4f}"
                fh.write(f"{value!r},{algorithm},{token}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomoswarm",
        description="Swarm formation and offload-power design for "
                    "tomographic imaging")
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("evaluate", help="score a fixed formation")
    pe.add_argument("--config", help="scenario file (default: built-in reference)")
    pe.add_argument("--out", required=True, help="output directory")
    src = pe.add_mutually_exclusive_group(required=True)
    src.add_argument("--formation", help="CSV with header uav,x,z")
    src.add_argument("--ula", type=float,
                     help="reference uniform array with this spacing (m)")
    pe.add_argument("--ula-orientation", default="perpendicular",
                    choices=["along_los", "perpendicular", "vertical"])
    pe.set_defaults(func=cmd_evaluate)

    po = sub.add_parser("optimize", help="run one optimizer seed")
    po.add_argument("--config")
    po.add_argument("--algorithm", default="proposed",
                    choices=sorted(ALGORITHMS))
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--iterations", type=int)
    po.add_argument("--population", type=int)
    po.add_argument("--out", required=True)
    po.set_defaults(func=cmd_optimize)

    ps = sub.add_parser("sweep", help="optimize over a parameter grid")
    ps.add_argument("--config")
    ps.add_argument("--sweep-param", required=True, choices=sorted(SWEEP_PARAMS))
    ps.add_argument("--sweep-values", required=True,
                    help="comma-separated parameter values")
    ps.add_argument("--algorithms", default="proposed",
                    help="comma-separated algorithm names")
    ps.add_argument("--seeds", default="0,1,2,3,4",
                    help="comma-separated seeds; medians are taken across them")
    ps.add_argument("--iterations", type=int)
    ps.add_argument("--population", type=int)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
