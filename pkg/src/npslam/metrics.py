"""Evaluation metrics against simulated ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .beliefs import ml_class

_FORBIDDEN = 1e12


def per_pose_errors(est, truth) -> np.ndarray:
    """Euclidean position error per pose; inputs must have equal length."""
    if len(est) != len(truth):
        raise ValueError(f"pose count mismatch: {len(est)} vs {len(truth)}")
    return np.array([np.hypot(e.x - t.x, e.y - t.y) for e, t in zip(est, truth)])


def trajectory_errors(est, truth) -> tuple:
    """(mean position error, cumulative position error) along the trajectory."""
    errs = per_pose_errors(est, truth)
    if errs.size == 0:
        return 0.0, 0.0
    return float(errs.mean()), float(errs.sum())


@dataclass
class ObjectMatch:
    count: int
    mean_error: float
    matching: list
    unmatched_est: list
    unmatched_truth: list


def estimated_class(landmark) -> int:
    """Most probable real class of a landmark (false-positive slot excluded)."""
    pi = ml_class(landmark.belief)
    return int(np.argmax(pi[1:])) + 1


def object_errors(est_landmarks, truth_objects) -> ObjectMatch:
    """Optimal one-to-one matching of estimates to true objects.

    Exact assignment on the Euclidean cost matrix with class-mismatch pairs
    forbidden; mean error is over matched pairs only. Unmatched estimates
    indicate over-segmentation, unmatched truth objects missed ones.
    """
    est = sorted(est_landmarks, key=lambda lm: lm.id)
    n_est, n_tru = len(est), len(truth_objects)
    if n_est == 0 or n_tru == 0:
        return ObjectMatch(n_est, 0.0, [], [lm.id for lm in est],
                           list(range(n_tru)))
    cost = np.full((n_est, n_tru), _FORBIDDEN)
    for i, lm in enumerate(est):
        ci = estimated_class(lm)
        for j, (pos, cj) in enumerate(truth_objects):
            if ci == cj:
                cost[i, j] = np.hypot(lm.position.x - pos.x, lm.position.y - pos.y)
    rows, cols = linear_sum_assignment(cost)
    matching = [(est[i].id, int(j), float(cost[i, j]))
                for i, j in zip(rows, cols) if cost[i, j] < _FORBIDDEN / 2]
    matched_est = {m[0] for m in matching}
    matched_tru = {m[1] for m in matching}
    mean_error = float(np.mean([m[2] for m in matching])) if matching else 0.0
    return ObjectMatch(
        n_est, mean_error, matching,
        [lm.id for lm in est if lm.id not in matched_est],
        [j for j in range(n_tru) if j not in matched_tru])


def association_accuracy(assoc: dict, sources: dict) -> float:
    """Percent of real detections whose landmark maps to their true object.

    Each landmark is labeled with the majority true source among its
    members; a detection counts as correct when its own source matches its
    landmark's label. Spurious detections (source -1) are excluded.
    """
    members: dict = {}
    for key, lid in assoc.items():
        src = sources.get(key)
        if src is None or src < 0:
            continue
        members.setdefault(lid, []).append(src)
    label = {}
    for lid, srcs in members.items():
        vals, cnts = np.unique(srcs, return_counts=True)
        label[lid] = int(vals[np.argmax(cnts)])
    total = 0
    correct = 0
    for key, lid in assoc.items():
        src = sources.get(key)
        if src is None or src < 0:
            continue
        total += 1
        if label[lid] == src:
            correct += 1
    return 100.0 * correct / total if total else 0.0


@dataclass
class MetricsReport:
    algorithm: str
    seed: int
    mean_pose_error: float
    cumulative_trajectory_error: float
    percent_measurements_used: float
    num_objects: int
    mean_object_error: float
    association_accuracy: float
    percent_inlier_measurements: float
    iterations: int
    object_count_history: list = field(default_factory=list)

    CSV_FIELDS = ("algorithm", "seed", "mean_pose_error",
                  "cumulative_trajectory_error", "percent_measurements_used",
                  "num_objects", "mean_object_error", "association_accuracy",
                  "percent_inlier_measurements", "iterations")


def evaluate_run(result, truth, dataset) -> MetricsReport:
    """Score one algorithm result against ground truth.

    Without a truth map (truth=None) only association-derived metrics are
    available; truth-dependent fields come back NaN and a detection counts
    as an inlier when its landmark survived pruning.
    """
    n_det = len(dataset.detections)
    used = 100.0 * len(result.assoc) / n_det if n_det else 100.0
    retained = {lm.id for lm in result.landmarks}
    inliers = sum(1 for lid in result.assoc.values() if lid in retained)
    inlier_pct = 100.0 * inliers / n_det if n_det else 100.0
    if truth is None:
        mean_err = cum_err = acc = float("nan")
        match = ObjectMatch(len(result.landmarks), float("nan"), [], [], [])
    else:
        mean_err, cum_err = trajectory_errors(result.poses, truth.poses)
        match = object_errors(result.landmarks, truth.objects)
        acc = association_accuracy(result.assoc, truth.detection_sources)
    return MetricsReport(
        algorithm=result.algorithm,
        seed=-1,
        mean_pose_error=mean_err,
        cumulative_trajectory_error=cum_err,
        percent_measurements_used=used,
        num_objects=len(result.landmarks),
        mean_object_error=match.mean_error,
        association_accuracy=acc,
        percent_inlier_measurements=inlier_pct,
        iterations=result.iterations_run,
        object_count_history=list(result.object_count_history),
    )
