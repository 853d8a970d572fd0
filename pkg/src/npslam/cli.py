"""Command-line interface.

Verbs: simulate (write a dataset + truth file), run (one algorithm on a
dataset), bench (all four algorithms over seeds), report (rebuild summary
and plots from metrics.csv). Configuration comes from a flat key=value file
plus --set overrides; the seed is always recorded in outputs.

Exit codes: 0 success, 1 validation/configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .association import DPParams
from .benchmark import (ALGORITHMS, run_benchmark, regenerate_report,
                        run_single, write_outputs)
from .benchmark import BenchmarkResult, RunOutcome, _write_run_files  # noqa: F401
from .dataset_io import (ParseError, ValidationError, load_dataset,
                         load_truth, save_dataset, save_truth, truth_path)
from .graph import SolverError, SolverSettings
from .metrics import evaluate_run
from .models import ModelError
from .pipeline import RunConfig
from .simulate import ConfigError, SimConfig, simulate

_SIM_KEYS = {f.name: f for f in dataclasses.fields(SimConfig)
             if f.name not in ("waypoints",)}
_DP_KEYS = {f.name: f for f in dataclasses.fields(DPParams)
            if f.name not in ("beta0",)}
_SOLVER_KEYS = {f.name: f for f in dataclasses.fields(SolverSettings)}
_RUN_KEYS = {"max_outer_iterations": int, "tau_gate": float}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _SIM_KEYS:
        typ = _SIM_KEYS[key].type
        return int(raw) if typ == "int" else float(raw)
    if key in _DP_KEYS:
        return float(raw)
    if key in _SOLVER_KEYS:
        return int(raw) if key == "max_iterations" else float(raw)
    if key in _RUN_KEYS:
        return _RUN_KEYS[key](raw)
    if key in ("seed", "seeds"):
        return int(raw)
    raise ConfigError(f"unknown config key {key!r}")


def load_config(path=None, overrides=()) -> dict:
    values: dict = {}
    if path is not None:
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip()
            values[key] = _parse_value(key, val)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, val = item.partition("=")
        key = key.strip()
        values[key] = _parse_value(key, val)
    return values


def build_configs(values: dict):
    sim_kwargs = {k: v for k, v in values.items() if k in _SIM_KEYS}
    if "seed" in values:
        sim_kwargs["seed"] = values["seed"]
    sim_cfg = SimConfig(**sim_kwargs)
    dp = DPParams(**{k: v for k, v in values.items() if k in _DP_KEYS})
    solver = SolverSettings(**{k: v for k, v in values.items()
                               if k in _SOLVER_KEYS})
    run_cfg = RunConfig(dp=dp, solver=solver,
                        **{k: v for k, v in values.items() if k in _RUN_KEYS})
    return sim_cfg, run_cfg


def _cmd_simulate(args) -> int:
    values = load_config(args.config, args.set)
    if args.seed is not None:
        values["seed"] = args.seed
    sim_cfg, _ = build_configs(values)
    truth, dataset = simulate(sim_cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out)
    save_truth(truth, truth_path(out))
    print(f"seed={sim_cfg.seed} poses={len(truth.poses)} "
          f"detections={len(dataset.detections)} -> {out}")
    return 0


def _cmd_run(args) -> int:
    values = load_config(args.config, args.set)
    _, run_cfg = build_configs(values)
    dataset = load_dataset(args.dataset)
    tpath = Path(args.truth) if args.truth else truth_path(args.dataset)
    truth = load_truth(tpath) if tpath.exists() else None
    result = run_single(args.algorithm, dataset, run_cfg)
    report = evaluate_run(result, truth, dataset)
    report.seed = values.get("seed", -1)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if truth is not None:
        _write_run_files(out_dir, result, truth)
    bench = BenchmarkResult([RunOutcome(args.algorithm, report.seed,
                                        report=report, result=result)],
                            [report.seed])
    write_outputs(bench, {}, out_dir)
    print(f"{args.algorithm}: objects={report.num_objects} "
          f"iterations={report.iterations} -> {out_dir}")
    return 0


def _cmd_bench(args) -> int:
    values = load_config(args.config, args.set)
    sim_cfg, run_cfg = build_configs(values)
    if args.seed_list:
        seeds = [int(s) for s in args.seed_list.split(",") if s.strip()]
    else:
        seeds = list(range(args.seeds))
    bench = run_benchmark(sim_cfg, run_cfg, seeds, out_dir=args.out,
                          save_datasets=args.save_datasets)
    failures = [o for o in bench.outcomes if o.error is not None]
    print(f"ran {len(bench.outcomes)} runs over {len(seeds)} seeds, "
          f"{len(failures)} failures -> {args.out}")
    return 0 if not failures else 2


def _cmd_report(args) -> int:
    regenerate_report(args.dir)
    print(f"report regenerated in {args.dir}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npslam",
        description="Nonparametric pose-graph SLAM benchmark tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a dataset + truth file")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--config", default=None)
    p_sim.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_sim.set_defaults(func=_cmd_simulate)

    p_run = sub.add_parser("run", help="run one algorithm on a dataset file")
    p_run.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    p_run.add_argument("--dataset", required=True)
    p_run.add_argument("--truth", default=None)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--config", default=None)
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_run.set_defaults(func=_cmd_run)

    p_bench = sub.add_parser("bench", help="run all algorithms over seeds")
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--seeds", type=int, default=10,
                         help="number of seeds (0..n-1)")
    p_bench.add_argument("--seed-list", default=None,
                         help="comma-separated explicit seeds")
    p_bench.add_argument("--config", default=None)
    p_bench.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_bench.add_argument("--save-datasets", action="store_true")
    p_bench.set_defaults(func=_cmd_bench)

    p_rep = sub.add_parser("report", help="rebuild summary and plots")
    p_rep.add_argument("--dir", required=True)
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError, ConfigError, ModelError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
