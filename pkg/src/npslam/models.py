"""Measurement models: odometry, object position, and class observations.

All log factors omit the Gaussian normalization constants. They cancel in
pose optimization and in association comparisons among existing objects;
the one place a constant matters (the new-object hypothesis) is covered by
an explicit density floor in the association module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .se2 import Point2, Pose2, between, normalize_angle, to_local

if TYPE_CHECKING:
    from .graph import PoseGraph


class ModelError(ValueError):
    """A measurement or its noise model violates the model contract."""


class ConsistencyError(ValueError):
    """An association references detections or landmarks that do not exist."""


def _check_spd(m: np.ndarray, size: int, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (size, size):
        raise ModelError(f"{what} must be {size}x{size}, got {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
        raise ModelError(f"{what} must be symmetric")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise ModelError(f"{what} must be positive definite") from exc
    return m


@dataclass
class Odometry:
    """Relative-pose measurement between poses t-1 and t with covariance Q."""

    t: int
    delta: Pose2
    cov_Q: np.ndarray

    def __post_init__(self):
        if self.t < 1:
            raise ModelError(f"odometry time index must be >= 1, got {self.t}")
        self.cov_Q = _check_spd(self.cov_Q, 3, "odometry covariance")


@dataclass
class Detection:
    """One object measurement: local position z, observed class u, covariance R."""

    t: int
    k: int
    z: Point2
    u: int
    cov_R: np.ndarray

    def __post_init__(self):
        if self.t < 0:
            raise ModelError(f"detection time index must be >= 0, got {self.t}")
        if self.k < 1:
            raise ModelError(f"within-frame index must be >= 1, got {self.k}")
        if self.u < 1:
            raise ModelError(f"observed class must be >= 1, got {self.u}")
        self.cov_R = _check_spd(self.cov_R, 2, "measurement covariance")

    @property
    def key(self) -> tuple:
        return (self.t, self.k)


@dataclass
class Dataset:
    """A full run: odometry o_1..o_T, detections, class count, start pose."""

    odometry: list = field(default_factory=list)
    detections: list = field(default_factory=list)
    num_classes: int = 0
    initial_pose: Pose2 = field(default_factory=Pose2)

    def __post_init__(self):
        for i, o in enumerate(self.odometry):
            if o.t != i + 1:
                raise ModelError(
                    f"odometry indices must run 1..T contiguously; missing t={i + 1}")
        t_max = len(self.odometry)
        seen = set()
        for d in self.detections:
            if d.t > t_max:
                raise ModelError(f"detection at t={d.t} beyond last odometry t={t_max}")
            if d.u > self.num_classes:
                raise ModelError(
                    f"detection class {d.u} exceeds num_classes={self.num_classes}")
            if d.key in seen:
                raise ModelError(f"duplicate detection key {d.key}")
            seen.add(d.key)

    @property
    def num_poses(self) -> int:
        return len(self.odometry) + 1

    def sorted_detections(self) -> list:
        return sorted(self.detections, key=lambda d: d.key)


def odometry_log_factor(o: Odometry, xa: Pose2, xb: Pose2) -> float:
    """Quadratic odometry factor: -0.5 r^T Q^-1 r, r = between(xa, xb) - delta."""
    pred = between(xa, xb)
    r = np.array([
        pred.x - o.delta.x,
        pred.y - o.delta.y,
        normalize_angle(pred.theta - o.delta.theta),
    ])
    return -0.5 * float(r @ np.linalg.solve(o.cov_Q, r))


def measurement_log_factor(d: Detection, x: Pose2, L: Point2) -> float:
    """Quadratic position factor: -0.5 r^T R^-1 r, r = to_local(x, L) - z."""
    pred = to_local(x, L)
    r = np.array([pred.x - d.z.x, pred.y - d.z.y])
    return -0.5 * float(r @ np.linalg.solve(d.cov_R, r))


def class_log_likelihood(u: int, pi: np.ndarray) -> float:
    """log pi(u) for an observed class u in 1..N; slot 0 is unobservable."""
    pi = np.asarray(pi, dtype=float)
    n = pi.size - 1
    if u < 1 or u > n:
        raise ValueError(f"observed class must be in 1..{n}, got {u}")
    p = pi[u]
    if p <= 0.0:
        return -math.inf
    return math.log(p)


def joint_log_likelihood(graph: "PoseGraph", assoc: dict) -> float:
    """Joint log likelihood of all factors plus class terms under an association.

    This is the objective the alternating scheme climbs: odometry factors,
    measurement factors against the associated landmarks, and log class
    probabilities under each landmark's current belief.
    """
    from .beliefs import ml_class

    total = 0.0
    for o in graph.dataset.odometry:
        total += odometry_log_factor(o, graph.poses[o.t - 1], graph.poses[o.t])
    for d in graph.dataset.detections:
        if d.key not in assoc:
            raise ConsistencyError(f"detection {d.key} has no association")
        lid = assoc[d.key]
        if lid not in graph.landmarks:
            raise ConsistencyError(f"association of {d.key} references missing landmark {lid}")
        lm = graph.landmarks[lid]
        total += measurement_log_factor(d, graph.poses[d.t], lm.position)
        total += class_log_likelihood(d.u, ml_class(lm.belief))
    return total
