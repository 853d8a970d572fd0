"""Experiment runner: all algorithms x seeds, metrics tables, and plots.

Outputs under the chosen directory:
  metrics.csv     one row per algorithm x seed (failures marked, never faked)
  summary.txt     aggregate mean +/- std per algorithm
  counts.csv      per-iteration object counts of the alternating algorithm
  cumerr.csv      cumulative trajectory error curves (first seed)
  plot_object_counts.svg, plot_cumulative_error.svg
  seed_<s>/<alg>/trajectory.csv, landmarks.csv
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svgplot
from .beliefs import ml_class
from .dataset_io import save_dataset, save_truth, truth_path
from .metrics import MetricsReport, estimated_class, evaluate_run, per_pose_errors
from .pipeline import RunConfig, run_fbf, run_np_slam, run_ol, run_rslam
from .simulate import SimConfig, simulate

ALGORITHMS = ("np", "ol", "rslam", "fbf")


def run_single(algorithm: str, dataset, cfg: RunConfig):
    if algorithm == "np":
        return run_np_slam(dataset, cfg)
    if algorithm == "ol":
        return run_ol(dataset, cfg)
    if algorithm == "rslam":
        return run_rslam(dataset, cfg)
    if algorithm == "fbf":
        return run_fbf(dataset)
    raise ValueError(f"unknown algorithm {algorithm!r}")


@dataclass
class RunOutcome:
    algorithm: str
    seed: int
    report: MetricsReport | None = None
    result: object = None
    error: str | None = None


@dataclass
class BenchmarkResult:
    outcomes: list
    seeds: list

    def rows(self):
        order = {a: i for i, a in enumerate(ALGORITHMS)}
        return sorted(self.outcomes, key=lambda o: (o.seed, order[o.algorithm]))

    def for_algorithm(self, algorithm: str):
        return [o for o in self.outcomes if o.algorithm == algorithm]


def run_benchmark(sim_cfg: SimConfig, run_cfg: RunConfig, seeds,
                  out_dir=None, algorithms=ALGORITHMS,
                  save_datasets: bool = False) -> BenchmarkResult:
    """Run every algorithm on one simulated dataset per seed."""
    outcomes = []
    curves = {}
    for seed in seeds:
        cfg_s = dataclasses.replace(sim_cfg, seed=int(seed))
        truth, dataset = simulate(cfg_s)
        if out_dir is not None and save_datasets:
            seed_dir = Path(out_dir) / f"seed_{seed}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            ds_path = seed_dir / "dataset.txt"
            save_dataset(dataset, ds_path)
            save_truth(truth, truth_path(ds_path))
        for alg in algorithms:
            outcome = RunOutcome(alg, int(seed))
            try:
                result = run_single(alg, dataset, run_cfg)
                report = evaluate_run(result, truth, dataset)
                report.seed = int(seed)
                outcome.report = report
                outcome.result = result
                if seed == seeds[0]:
                    curves[alg] = np.cumsum(
                        per_pose_errors(result.poses, truth.poses))
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                outcome.error = f"{type(exc).__name__}: {exc}"
            outcomes.append(outcome)
            if out_dir is not None and outcome.report is not None:
                _write_run_files(Path(out_dir) / f"seed_{seed}" / alg,
                                 outcome.result, truth)
    bench = BenchmarkResult(outcomes, [int(s) for s in seeds])
    if out_dir is not None:
        write_outputs(bench, curves, Path(out_dir))
    return bench


def _write_run_files(run_dir: Path, result, truth) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    errs = per_pose_errors(result.poses, truth.poses)
    with open(run_dir / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "theta", "position_error"])
        for t, (p, e) in enumerate(zip(result.poses, errs)):
            w.writerow([t, f"{p.x:.9g}", f"{p.y:.9g}", f"{p.theta:.9g}",
                        f"{e:.9g}"])
    with open(run_dir / "landmarks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y", "class", "count", "fp_probability"])
        for lm in sorted(result.landmarks, key=lambda lm: lm.id):
            w.writerow([lm.id, f"{lm.position.x:.9g}", f"{lm.position.y:.9g}",
                        estimated_class(lm), lm.count_m,
                        f"{ml_class(lm.belief)[0]:.9g}"])


def _num(v) -> str:
    if isinstance(v, float) and np.isnan(v):
        return "NA"
    return f"{v:.6g}"


def _metric_cells(report: MetricsReport):
    return [report.algorithm, report.seed,
            _num(report.mean_pose_error),
            _num(report.cumulative_trajectory_error),
            _num(report.percent_measurements_used),
            report.num_objects,
            _num(report.mean_object_error),
            _num(report.association_accuracy),
            _num(report.percent_inlier_measurements),
            report.iterations]


def write_outputs(bench: BenchmarkResult, curves: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(MetricsReport.CSV_FIELDS) + ["status"])
        for o in bench.rows():
            if o.report is not None:
                w.writerow(_metric_cells(o.report) + ["ok"])
            else:
                w.writerow([o.algorithm, o.seed] + ["FAILED"] * 8 + [o.error])

    with open(out_dir / "counts.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "iteration", "num_objects"])
        for o in bench.for_algorithm("np"):
            if o.report is None:
                continue
            for i, n in enumerate(o.report.object_count_history, start=1):
                w.writerow([o.seed, i, n])

    with open(out_dir / "cumerr.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "t", "cumulative_error"])
        for alg in ALGORITHMS:
            if alg not in curves:
                continue
            for t, v in enumerate(curves[alg]):
                w.writerow([alg, t, f"{v:.9g}"])

    write_summary(bench, out_dir / "summary.txt")

    count_series = []
    for o in bench.for_algorithm("np"):
        if o.report is not None:
            hist = o.report.object_count_history
            count_series.append((f"seed {o.seed}",
                                 list(range(1, len(hist) + 1)), hist))
    svgplot.line_plot(out_dir / "plot_object_counts.svg", count_series,
                      "Object count per iteration", "iteration", "objects")
    err_series = [(alg, list(range(len(curves[alg]))), list(curves[alg]))
                  for alg in ALGORITHMS if alg in curves]
    svgplot.line_plot(out_dir / "plot_cumulative_error.svg", err_series,
                      "Cumulative trajectory error", "pose index",
                      "cumulative error [m]")


_SUMMARY_METRICS = (
    ("mean_pose_error", "mean pose error [m]"),
    ("cumulative_trajectory_error", "cumulative trajectory error [m]"),
    ("percent_measurements_used", "measurements used [%]"),
    ("num_objects", "number of objects"),
    ("mean_object_error", "mean object error [m]"),
    ("association_accuracy", "association accuracy [%]"),
)


def read_metrics_csv(path) -> BenchmarkResult:
    """Reload a metrics.csv into outcome rows (for the report verb)."""
    outcomes = []
    seeds = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            alg = row["algorithm"]
            seed = int(row["seed"])
            if seed not in seeds:
                seeds.append(seed)
            if row["status"] != "ok":
                outcomes.append(RunOutcome(alg, seed, error=row["status"]))
                continue

            def num(name):
                v = row[name]
                return float("nan") if v == "NA" else float(v)

            report = MetricsReport(
                algorithm=alg, seed=seed,
                mean_pose_error=num("mean_pose_error"),
                cumulative_trajectory_error=num("cumulative_trajectory_error"),
                percent_measurements_used=num("percent_measurements_used"),
                num_objects=int(row["num_objects"]),
                mean_object_error=num("mean_object_error"),
                association_accuracy=num("association_accuracy"),
                percent_inlier_measurements=num("percent_inlier_measurements"),
                iterations=int(row["iterations"]))
            outcomes.append(RunOutcome(alg, seed, report=report))
    return BenchmarkResult(outcomes, seeds)


def regenerate_report(out_dir) -> None:
    """Rebuild summary.txt and plots from the CSV files in out_dir."""
    out_dir = Path(out_dir)
    bench = read_metrics_csv(out_dir / "metrics.csv")
    write_summary(bench, out_dir / "summary.txt")

    counts: dict = {}
    counts_path = out_dir / "counts.csv"
    if counts_path.exists():
        with open(counts_path, newline="") as fh:
            for row in csv.DictReader(fh):
                counts.setdefault(int(row["seed"]), []).append(
                    (int(row["iteration"]), int(row["num_objects"])))
    count_series = [(f"seed {s}", [i for i, _ in pts], [n for _, n in pts])
                    for s, pts in sorted(counts.items())]
    svgplot.line_plot(out_dir / "plot_object_counts.svg", count_series,
                      "Object count per iteration", "iteration", "objects")

    curves: dict = {}
    cum_path = out_dir / "cumerr.csv"
    if cum_path.exists():
        with open(cum_path, newline="") as fh:
            for row in csv.DictReader(fh):
                curves.setdefault(row["algorithm"], []).append(
                    float(row["cumulative_error"]))
    err_series = [(alg, list(range(len(curves[alg]))), curves[alg])
                  for alg in ALGORITHMS if alg in curves]
    svgplot.line_plot(out_dir / "plot_cumulative_error.svg", err_series,
                      "Cumulative trajectory error", "pose index",
                      "cumulative error [m]")


def write_summary(bench: BenchmarkResult, path) -> None:
    lines = ["npslam benchmark summary",
             f"seeds: {', '.join(str(s) for s in bench.seeds)}", ""]
    header = f"{'metric':<36}" + "".join(f"{a:>18}" for a in ALGORITHMS)
    lines.append(header)
    lines.append("-" * len(header))
    for attr, label in _SUMMARY_METRICS:
        cells = []
        for alg in ALGORITHMS:
            vals = [getattr(o.report, attr) for o in bench.for_algorithm(alg)
                    if o.report is not None]
            vals = [v for v in vals if not (isinstance(v, float) and np.isnan(v))]
            if vals:
                mean = float(np.mean(vals))
                std = float(np.std(vals))
                cells.append(f"{mean:.3f} +/- {std:.3f}")
            else:
                cells.append("FAILED")
        lines.append(f"{label:<36}" + "".join(f"{c:>18}" for c in cells))
    failures = [o for o in bench.rows() if o.error is not None]
    if failures:
        lines.append("")
        lines.append("failures:")
        for o in failures:
            lines.append(f"  {o.algorithm} seed {o.seed}: {o.error}")
    Path(path).write_text("\n".join(lines) + "\n")
