"""Alternating inference plus the three comparison baselines.

run_np_slam alternates association sweeps with pose-graph optimization until
the association reaches a fixed point, then prunes probable false positives.
The baselines share the same result type: frame-by-frame (no association, no
correction), open-loop (gated association on dead-reckoned poses, no
correction), and robust SLAM (one maximal consistent measurement set per
class, everything else discarded).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .association import (DPParams, prune_false_positives, reassign_all,
                          resolve_dp_params, update_class_beliefs)
from .beliefs import ClassBelief
from .graph import (Landmark, SolverError, SolverSettings, build_graph,
                    dead_reckon, landmark_means, optimize)
from .models import Dataset
from .se2 import Point2, to_global


@dataclass
class RunConfig:
    dp: DPParams = field(default_factory=DPParams)
    solver: SolverSettings = field(default_factory=SolverSettings)
    max_outer_iterations: int = 10
    tau_gate: float = 0.5

    def __post_init__(self):
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.tau_gate <= 0:
            raise ValueError("tau_gate must be positive")


@dataclass
class NpSlamResult:
    algorithm: str
    poses: list
    landmarks: list
    assoc: dict
    iterations_run: int
    object_count_history: list
    solver_reports: list = field(default_factory=list)


def run_np_slam(dataset: Dataset, cfg: RunConfig | None = None) -> NpSlamResult:
    """Joint association and SLAM by alternating sweeps and optimization.

    Starts from dead-reckoned poses with every detection as its own object,
    then loops {reassign -> refresh beliefs -> optimize} until a sweep
    changes nothing or the iteration cap is hit. False-positive pruning is
    applied once at the end.
    """
    cfg = cfg or RunConfig()
    poses = dead_reckon(dataset)
    params = resolve_dp_params(cfg.dp, dataset, poses)
    dets = dataset.sorted_detections()
    assoc = {d.key: i for i, d in enumerate(dets)}
    # beliefs conditioned on the initial one-object-per-detection association,
    # so the very first sweep can already tell classes apart
    beliefs0 = update_class_beliefs(assoc, dataset, params,
                                    list(range(len(dets))))
    landmarks = [
        Landmark(i, to_global(poses[d.t], d.z), beliefs0[i], 1)
        for i, d in enumerate(dets)
    ]

    history = []
    reports = []
    iterations = 0
    sweep_params = params
    for _ in range(cfg.max_outer_iterations):
        iterations += 1
        assoc, landmarks, changed = reassign_all(dataset, poses, landmarks,
                                                 assoc, sweep_params)
        beliefs = update_class_beliefs(assoc, dataset, params,
                                       [lm.id for lm in landmarks])
        landmarks = [Landmark(lm.id, lm.position, beliefs[lm.id], lm.count_m)
                     for lm in landmarks]
        history.append(len(landmarks))
        graph = build_graph(dataset, assoc, poses, landmarks)
        try:
            res = optimize(graph, cfg.solver)
        except SolverError as exc:
            raise SolverError(f"outer iteration {iterations}: {exc}") from exc
        reports.append(res)
        poses = res.poses
        landmarks = [Landmark(lm.id, res.landmark_positions[lm.id], lm.belief,
                              lm.count_m) for lm in landmarks]
        if changed == 0:
            break
        sweep_params = dataclasses.replace(
            sweep_params,
            assoc_extra_sigma=sweep_params.assoc_extra_sigma * params.assoc_extra_decay)
    retained = prune_false_positives(landmarks, params)
    return NpSlamResult("np", poses, retained, assoc, iterations, history,
                        reports)


def run_fbf(dataset: Dataset) -> NpSlamResult:
    """Frame-by-frame: every detection becomes its own object, no correction."""
    poses = dead_reckon(dataset)
    beta0 = ClassBelief.uniform(dataset.num_classes)
    landmarks = []
    assoc = {}
    for i, d in enumerate(dataset.sorted_detections()):
        beta = beta0.beta.copy()
        beta[d.u] += 1.0
        landmarks.append(Landmark(i, to_global(poses[d.t], d.z),
                                  ClassBelief(beta), 1))
        assoc[d.key] = i
    return NpSlamResult("fbf", poses, landmarks, assoc, 1, [len(landmarks)])


def run_ol(dataset: Dataset, cfg: RunConfig | None = None) -> NpSlamResult:
    """Open-loop: gated same-class nearest-neighbor association on
    dead-reckoned poses; poses are never corrected."""
    cfg = cfg or RunConfig()
    poses = dead_reckon(dataset)
    sums: list = []
    counts: list = []
    classes: list = []
    assoc = {}
    for d in dataset.sorted_detections():
        g = to_global(poses[d.t], d.z)
        best = -1
        best_dist = cfg.tau_gate
        for i in range(len(sums)):
            if classes[i] != d.u:
                continue
            mx = sums[i][0] / counts[i]
            my = sums[i][1] / counts[i]
            dist = np.hypot(mx - g.x, my - g.y)
            if dist < best_dist:
                best = i
                best_dist = dist
        if best < 0:
            best = len(sums)
            sums.append([0.0, 0.0])
            counts.append(0)
            classes.append(d.u)
        sums[best][0] += g.x
        sums[best][1] += g.y
        counts[best] += 1
        assoc[d.key] = best
    beliefs = update_class_beliefs(assoc, dataset, DPParams(),
                                   list(range(len(sums))))
    landmarks = [
        Landmark(i, Point2(sums[i][0] / counts[i], sums[i][1] / counts[i]),
                 beliefs[i], counts[i])
        for i in range(len(sums))
    ]
    return NpSlamResult("ol", poses, landmarks, assoc, 1, [len(landmarks)])


def _greedy_max_clique(adj: np.ndarray) -> list:
    """Highest-degree-first clique approximation; ties go to the lowest index."""
    cand = np.arange(adj.shape[0])
    clique = []
    while cand.size:
        sub = adj[np.ix_(cand, cand)]
        v = cand[int(np.argmax(sub.sum(axis=1)))]
        clique.append(int(v))
        cand = cand[adj[v, cand]]
        cand = cand[cand != v]
    return sorted(clique)


def run_rslam(dataset: Dataset, cfg: RunConfig | None = None) -> NpSlamResult:
    """Robust SLAM baseline: keep one maximal set of mutually consistent
    measurements per class, optimize poses with only those, drop the rest."""
    cfg = cfg or RunConfig()
    poses = dead_reckon(dataset)
    dets = dataset.sorted_detections()
    globals_xy = np.array([[p.x, p.y] for p in
                           (to_global(poses[d.t], d.z) for d in dets)]
                          ).reshape(len(dets), 2)
    selected = []
    lm_of_class = {}
    for c in range(1, dataset.num_classes + 1):
        idxs = np.array([i for i, d in enumerate(dets) if d.u == c], dtype=int)
        if idxs.size == 0:
            continue
        pts = globals_xy[idxs]
        dist = np.hypot(pts[:, 0, None] - pts[None, :, 0],
                        pts[:, 1, None] - pts[None, :, 1])
        adj = dist < cfg.tau_gate
        np.fill_diagonal(adj, False)
        clique = _greedy_max_clique(adj)
        lm_of_class[c] = len(lm_of_class)
        selected.extend(int(idxs[q]) for q in clique)
    selected.sort()

    kept = [dets[i] for i in selected]
    sub = Dataset(dataset.odometry, kept, dataset.num_classes,
                  dataset.initial_pose)
    assoc = {d.key: lm_of_class[d.u] for d in kept}
    means = landmark_means(sub, assoc, poses)
    beliefs = update_class_beliefs(assoc, sub, DPParams(),
                                   list(lm_of_class.values()))
    landmarks = [Landmark(j, means[j], beliefs[j], 0)
                 for j in sorted(lm_of_class.values())]
    graph = build_graph(sub, assoc, poses, landmarks)
    res = optimize(graph, cfg.solver)
    counts = {j: 0 for j in lm_of_class.values()}
    for d in kept:
        counts[assoc[d.key]] += 1
    final = [Landmark(j, res.landmark_positions[j], beliefs[j], counts[j])
             for j in sorted(lm_of_class.values())]
    return NpSlamResult("rslam", res.poses, final, assoc, 1, [len(final)],
                        [res])
