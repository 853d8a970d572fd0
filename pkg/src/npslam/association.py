"""Dirichlet-process data association over object landmarks.

The association posterior for a detection combines three log terms: the DP
prior over existing objects plus one fresh slot, the class likelihood under
each object's belief, and the position likelihood against each object. The
fresh-slot hypothesis carries a fixed log-density floor (log of one over the
workspace area) in place of a position term, which acts as the hard
new-cluster threshold of small-variance DP clustering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .beliefs import ClassBelief, ml_class
from .graph import Landmark, dead_reckon
from .models import Dataset, Detection
from .se2 import Point2, Pose2, to_global, to_local

__all__ = [
    "ClassBelief",
    "ml_class",
    "DPParams",
    "dp_prior",
    "posterior_over_objects",
    "reassign_all",
    "update_class_beliefs",
    "prune_false_positives",
    "resolve_dp_params",
]

_AREA_INFLATION = 1.5


@dataclass(frozen=True)
class DPParams:
    """Association knobs: DP concentration, class prior, pruning threshold.

    rho_new and beta0 may be left unset; resolve_dp_params fills them from a
    dataset (beta0 all ones, rho_new = log(1 / workspace_area) with the area
    taken from the dead-reckoned detection bounding box, inflated 1.5x).

    assoc_extra_sigma widens the position likelihood used during association
    (R + sigma^2 I) to absorb the pose drift present while poses are still
    uncorrected; the solver's measurement factors are not affected. The
    alternating pipeline shrinks it by assoc_extra_decay after every pose
    optimization (drift drops as loops close), which lets early greedy
    merges dissolve again once positions firm up. Set it to 0 to score with
    the raw measurement covariance.
    """

    alpha: float = 1.0
    beta0: ClassBelief | None = None
    epsilon_fp: float = 0.02
    rho_new: float | None = None
    workspace_area: float | None = None
    assoc_extra_sigma: float = 0.15
    assoc_extra_decay: float = 0.5

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.epsilon_fp:
            raise ValueError("epsilon_fp must be in (0, 1]")
        if self.workspace_area is not None and self.workspace_area <= 0:
            raise ValueError("workspace_area must be positive")
        if self.assoc_extra_sigma < 0:
            raise ValueError("assoc_extra_sigma must be nonnegative")
        if not 0 < self.assoc_extra_decay <= 1:
            raise ValueError("assoc_extra_decay must be in (0, 1]")


def resolve_dp_params(params: DPParams, dataset: Dataset,
                      poses: list | None = None) -> DPParams:
    """Fill unset defaults from the dataset; returns a fully concrete copy."""
    beta0 = params.beta0 or ClassBelief.uniform(dataset.num_classes)
    if beta0.num_classes != dataset.num_classes:
        raise ValueError(
            f"beta0 covers {beta0.num_classes} classes, dataset has {dataset.num_classes}")
    rho_new = params.rho_new
    area = params.workspace_area
    if rho_new is None:
        if area is None:
            poses = poses if poses is not None else dead_reckon(dataset)
            pts = [to_global(poses[d.t], d.z) for d in dataset.detections]
            if pts:
                xs = [p.x for p in pts]
                ys = [p.y for p in pts]
                bbox = (max(xs) - min(xs)) * (max(ys) - min(ys))
            else:
                bbox = 0.0
            area = _AREA_INFLATION * max(bbox, 1.0)
        rho_new = -math.log(area)
    return replace(params, beta0=beta0, rho_new=rho_new, workspace_area=area)


def dp_prior(counts, alpha: float) -> np.ndarray:
    """DP assignment prior: existing objects by count, one new-object slot.

    Entry i < M is m_i / (sum(m) + alpha); the last entry is
    alpha / (sum(m) + alpha). Sums to 1.
    """
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    denom = counts.sum() + alpha
    out = np.empty(counts.size + 1)
    out[:-1] = counts / denom
    out[-1] = alpha / denom
    return out


def _assoc_cov(d: Detection, params: DPParams) -> np.ndarray:
    extra = params.assoc_extra_sigma
    return d.cov_R + (extra * extra) * np.eye(2)


def _measurement_world_info(d: Detection, pose: Pose2, params: DPParams) -> tuple:
    """World-frame association information matrix, Rot (R+s^2 I)^-1 Rot^T packed."""
    rinv = np.linalg.inv(_assoc_cov(d, params))
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    rot = np.array([[c, -s], [s, c]])
    w = rot @ rinv @ rot.T
    return float(w[0, 0]), float(w[0, 1]), float(w[1, 1])


def posterior_over_objects(d: Detection, pose: Pose2, landmarks,
                           params: DPParams) -> np.ndarray:
    """Log association scores for one detection: M existing slots + new slot.

    Existing slot i: log DP(i) + log pi_i(u) + quadratic position term under
    the association covariance (R plus the assoc_extra_sigma widening).
    New slot: log DP(new) + log pi_0(u) + the density floor rho_new.
    Slots with zero DP mass score -inf.
    """
    if params.rho_new is None or params.beta0 is None:
        raise ValueError("params must be resolved (beta0 and rho_new set)")
    lms = sorted(landmarks, key=lambda lm: lm.id)
    counts = np.array([lm.count_m for lm in lms], dtype=float)
    with np.errstate(divide="ignore"):
        log_dp = np.log(dp_prior(counts, params.alpha))
    cov = _assoc_cov(d, params)
    scores = np.empty(len(lms) + 1)
    for i, lm in enumerate(lms):
        if counts[i] == 0.0:
            scores[i] = -np.inf
            continue
        local = to_local(pose, lm.position)
        r = np.array([local.x - d.z.x, local.y - d.z.y])
        scores[i] = (log_dp[i]
                     + math.log(ml_class(lm.belief)[d.u])
                     - 0.5 * float(r @ np.linalg.solve(cov, r)))
    scores[-1] = (log_dp[-1]
                  + math.log(ml_class(params.beta0)[d.u])
                  + params.rho_new)
    return scores


def _log_pi_row(belief: ClassBelief) -> np.ndarray:
    return np.log(ml_class(belief))


def reassign_all(dataset: Dataset, poses, landmarks, assoc: dict,
                 params: DPParams):
    """One maximum-likelihood association sweep over all detections.

    Detections are visited in (t, k) order. Each is removed from its current
    object, scored against every object with remaining members plus the
    new-object hypothesis, and assigned to the argmax; member counts and
    object means (running means of globally mapped detections) update
    immediately. Objects left empty are dropped and ids are compacted.

    Returns (new association, new landmark list, changed detection count).
    Beliefs are carried over for surviving objects and set to the prior for
    created ones; recompute them with update_class_beliefs afterwards.
    """
    params = resolve_dp_params(params, dataset, poses)
    dets = dataset.sorted_detections()
    D = len(dets)
    if D == 0:
        return {}, [], 0

    lms = sorted(landmarks, key=lambda lm: lm.id)
    slot_of = {lm.id: i for i, lm in enumerate(lms)}
    M0 = len(lms)
    cap = M0 + D
    n_classes = dataset.num_classes

    lm_sum = np.zeros((cap, 2))
    lm_count = np.zeros(cap)
    lm_logpi = np.zeros((cap, n_classes + 1))
    for i, lm in enumerate(lms):
        lm_count[i] = lm.count_m
        lm_sum[i, 0] = lm.position.x * lm.count_m
        lm_sum[i, 1] = lm.position.y * lm.count_m
        lm_logpi[i] = _log_pi_row(lm.belief)
    new_logpi = _log_pi_row(params.beta0)

    det_global = np.empty((D, 2))
    det_u = np.empty(D, dtype=np.int64)
    det_w = np.empty((D, 3))
    assign = np.empty(D, dtype=np.int64)
    for i, d in enumerate(dets):
        g = to_global(poses[d.t], d.z)
        det_global[i] = (g.x, g.y)
        det_u[i] = d.u
        det_w[i] = _measurement_world_info(d, poses[d.t], params)
        if d.key not in assoc:
            raise ValueError(f"detection {d.key} missing from input association")
        assign[i] = slot_of[assoc[d.key]]
    assign_in = assign.copy()

    n_slots = kernels.sweep_assign(det_global, det_u, det_w, new_logpi,
                                   lm_sum, lm_count, lm_logpi, assign,
                                   M0, params.alpha, params.rho_new)

    changed = int(np.sum(assign != assign_in))
    survivors = [s for s in range(n_slots) if lm_count[s] > 0.0]
    new_id = {s: i for i, s in enumerate(survivors)}
    new_assoc = {d.key: new_id[int(assign[i])] for i, d in enumerate(dets)}
    new_landmarks = []
    for s in survivors:
        cnt = int(lm_count[s])
        pos = Point2(lm_sum[s, 0] / lm_count[s], lm_sum[s, 1] / lm_count[s])
        belief = lms[s].belief if s < M0 else params.beta0
        new_landmarks.append(Landmark(new_id[s], pos, belief, cnt))
    return new_assoc, new_landmarks, changed


def update_class_beliefs(assoc: dict, dataset: Dataset, params: DPParams,
                         landmark_ids=None) -> dict:
    """Recompute beliefs as prior-plus-counts from the current association.

    Always restarts from beta0 (never accumulates across iterations) and
    puts no observation mass on the false-positive slot.
    """
    beta0 = params.beta0 or ClassBelief.uniform(dataset.num_classes)
    ids = set(landmark_ids) if landmark_ids is not None else set(assoc.values())
    counts = {lid: np.zeros(beta0.num_classes + 1) for lid in ids}
    for d in dataset.detections:
        lid = assoc.get(d.key)
        if lid is None:
            raise ValueError(f"detection {d.key} missing from association")
        counts[lid][d.u] += 1.0
    return {lid: ClassBelief(beta0.beta + counts[lid]) for lid in sorted(ids)}


def prune_false_positives(landmarks, params: DPParams) -> list:
    """Drop every landmark whose false-positive probability exceeds epsilon."""
    return [lm for lm in sorted(landmarks, key=lambda lm: lm.id)
            if ml_class(lm.belief)[0] <= params.epsilon_fp]
