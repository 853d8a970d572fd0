"""Simulated 2D world: random class-labeled objects, a multi-pass survey
trajectory, field-of-view-gated noisy detections, and noisy odometry.

All randomness comes from one seeded generator in a fixed draw order, so a
(config, seed) pair reproduces the dataset bit for bit. The ground-truth
source of every detection is recorded in a side channel that the inference
code never sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .models import Dataset, Detection, Odometry
from .se2 import Point2, Pose2, between, to_local

# covariance floor keeps factors well-defined when a noise sigma is zero
_COV_SIGMA_FLOOR = 1e-6


class ConfigError(ValueError):
    """Simulation configuration cannot produce a valid world."""


@dataclass
class SimConfig:
    num_objects: int = 15
    num_classes: int = 5
    world_extent: float = 5.0
    fov_range: float = 4.0
    fov_half_angle: float = math.radians(60.0)
    min_separation: float = 0.8
    min_same_class_separation: float = 2.0
    odom_sigma: float = 0.02
    odom_sigma_theta: float = 0.002
    meas_sigma: float = 0.1
    class_flip_prob: float = 0.0
    false_positive_rate: float = 0.0
    waypoints: list | None = None
    step_length: float = 0.095
    seed: int = 0

    def __post_init__(self):
        for name in ("world_extent", "fov_range", "fov_half_angle", "step_length"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("class_flip_prob",):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.false_positive_rate < 0:
            raise ConfigError("false_positive_rate must be nonnegative")

    @property
    def sigma_theta(self) -> float:
        return self.odom_sigma_theta


@dataclass
class GroundTruth:
    poses: list
    objects: list
    detection_sources: dict = field(default_factory=dict)


def default_waypoints() -> list:
    """The shipped survey loop (multiple passes with diagonal crossings)."""
    text = resources.files("npslam.data").joinpath("default_waypoints.txt").read_text()
    pts = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        x, y = line.split()
        pts.append((float(x), float(y)))
    return pts


_MAX_REJECTS = 10_000


def generate_world(cfg: SimConfig, rng=None) -> list:
    """Place class-labeled objects uniformly with separation floors.

    Classes are uniform per object; when there are at least as many objects
    as classes, the class vector is redrawn until every class occurs at
    least once, so class-conditioned baselines stay well-defined. Positions
    are rejection-sampled to keep any pair at least min_separation apart and
    same-class pairs at least min_same_class_separation apart (same-class
    objects closer than the odometry drift scale are not identifiable from
    the measurements, so such worlds are excluded by construction).
    Returns a list of (Point2, class_id).
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if cfg.num_objects == 0:
        return []
    for attempt in range(_MAX_REJECTS + 1):
        if attempt == _MAX_REJECTS:
            raise ConfigError("could not draw a class per object covering all classes")
        classes = rng.integers(1, cfg.num_classes + 1, size=cfg.num_objects)
        if (cfg.num_objects < cfg.num_classes
                or len(set(classes.tolist())) == cfg.num_classes):
            break
    positions = []
    for i in range(cfg.num_objects):
        for attempt in range(_MAX_REJECTS + 1):
            if attempt == _MAX_REJECTS:
                raise ConfigError(
                    "could not place objects with the requested separation; "
                    "world_extent too small")
            p = rng.uniform(-cfg.world_extent, cfg.world_extent, size=2)
            ok = True
            for j, q in enumerate(positions):
                floor = (cfg.min_same_class_separation
                         if classes[j] == classes[i] else cfg.min_separation)
                if np.hypot(p[0] - q[0], p[1] - q[1]) < floor:
                    ok = False
                    break
            if ok:
                positions.append((float(p[0]), float(p[1])))
                break
    return [(Point2(x, y), int(c)) for (x, y), c in zip(positions, classes)]


def generate_trajectory(cfg: SimConfig) -> list:
    """Interpolate the waypoint polyline into fixed-length steps.

    Poses sit every step_length of arc length, headings face the travel
    direction, and the exact final waypoint is appended when the length is
    not a multiple of the step.
    """
    wps = cfg.waypoints if cfg.waypoints is not None else default_waypoints()
    if len(wps) < 2:
        raise ConfigError("trajectory needs at least 2 waypoints")
    segs = []
    for (x0, y0), (x1, y1) in zip(wps[:-1], wps[1:]):
        length = math.hypot(x1 - x0, y1 - y0)
        if length > 0.0:
            segs.append((x0, y0, x1, y1, length, math.atan2(y1 - y0, x1 - x0)))
    if not segs:
        raise ConfigError("trajectory waypoints are all coincident")
    total = sum(s[4] for s in segs)

    poses = []
    s_query = 0.0
    seg_i = 0
    base = 0.0
    while s_query <= total + 1e-12:
        while seg_i + 1 < len(segs) and s_query >= base + segs[seg_i][4] - 1e-12:
            base += segs[seg_i][4]
            seg_i += 1
        x0, y0, _, _, length, heading = segs[seg_i]
        frac = min((s_query - base) / length, 1.0)
        poses.append(Pose2(x0 + frac * (segs[seg_i][2] - x0),
                           y0 + frac * (segs[seg_i][3] - y0), heading))
        s_query += cfg.step_length
    end = wps[-1]
    if math.hypot(poses[-1].x - end[0], poses[-1].y - end[1]) > 1e-9:
        poses.append(Pose2(end[0], end[1], segs[-1][5]))
    return poses


def simulate(cfg: SimConfig):
    """Generate (GroundTruth, Dataset) for the configured world.

    Per pose, every object within sensor range and bearing yields a noisy
    local-frame detection with its true class (optionally flipped); spurious
    detections arrive at the configured Poisson rate, uniform over the field
    of view with uniform class.
    """
    rng = np.random.default_rng(cfg.seed)
    objects = generate_world(cfg, rng)
    poses = generate_trajectory(cfg)

    sig_t = cfg.sigma_theta
    q_sig = max(cfg.odom_sigma, _COV_SIGMA_FLOOR)
    q_sig_t = max(sig_t, _COV_SIGMA_FLOOR)
    cov_q = np.diag([q_sig ** 2, q_sig ** 2, q_sig_t ** 2])
    r_sig = max(cfg.meas_sigma, _COV_SIGMA_FLOOR)
    cov_r = np.diag([r_sig ** 2, r_sig ** 2])

    odometry = []
    for t in range(1, len(poses)):
        d = between(poses[t - 1], poses[t])
        noise = rng.normal(0.0, [cfg.odom_sigma, cfg.odom_sigma, sig_t])
        odometry.append(Odometry(
            t, Pose2(d.x + noise[0], d.y + noise[1], d.theta + noise[2]), cov_q))

    detections = []
    sources = {}
    for t, pose in enumerate(poses):
        k = 0
        for obj_id, (opos, oclass) in enumerate(objects):
            local = to_local(pose, opos)
            rng_dist = math.hypot(local.x, local.y)
            if rng_dist > cfg.fov_range:
                continue
            if abs(math.atan2(local.y, local.x)) > cfg.fov_half_angle:
                continue
            noise = rng.normal(0.0, cfg.meas_sigma, size=2)
            u = oclass
            if cfg.class_flip_prob > 0.0 and rng.uniform() < cfg.class_flip_prob:
                others = [c for c in range(1, cfg.num_classes + 1) if c != oclass]
                u = others[rng.integers(0, len(others))]
            k += 1
            detections.append(Detection(
                t, k, Point2(local.x + noise[0], local.y + noise[1]), u, cov_r))
            sources[(t, k)] = obj_id
        if cfg.false_positive_rate > 0.0:
            for _ in range(rng.poisson(cfg.false_positive_rate)):
                rr = rng.uniform(0.0, cfg.fov_range)
                bb = rng.uniform(-cfg.fov_half_angle, cfg.fov_half_angle)
                uu = int(rng.integers(1, cfg.num_classes + 1))
                k += 1
                detections.append(Detection(
                    t, k, Point2(rr * math.cos(bb), rr * math.sin(bb)), uu, cov_r))
                sources[(t, k)] = -1

    dataset = Dataset(odometry, detections, cfg.num_classes, poses[0])
    return GroundTruth(poses, objects, sources), dataset
