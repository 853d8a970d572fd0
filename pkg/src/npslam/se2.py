"""SE(2) pose algebra: composition, relative pose, point transforms, Jacobians.

Poses are (x, y, theta) with theta normalized to (-pi, pi]. Jacobians are
taken with respect to the flat (x, y, theta) coordinates, not a Lie-algebra
retraction; the solver and the finite-difference tests share this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]. normalize_angle(-pi) == pi."""
    a = math.fmod(theta + math.pi, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    a -= math.pi
    # fmod lands exactly on -pi for inputs equivalent to pi
    if a <= -math.pi:
        a = math.pi
    return a


@dataclass(frozen=True)
class Point2:
    """A 2D point in meters."""

    x: float = 0.0
    y: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point2 components must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def from_array(cls, v) -> "Point2":
        return cls(float(v[0]), float(v[1]))


@dataclass(frozen=True)
class Pose2:
    """An SE(2) pose: position in meters, heading in radians, CCW positive."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    @classmethod
    def from_array(cls, v) -> "Pose2":
        return cls(float(v[0]), float(v[1]), float(v[2]))


def compose(a: Pose2, b: Pose2) -> Pose2:
    """Chain two poses: b expressed in a's frame, mapped to the global frame."""
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    return Pose2(
        a.x + c * b.x - s * b.y,
        a.y + s * b.x + c * b.y,
        a.theta + b.theta,
    )


def between(a: Pose2, b: Pose2) -> Pose2:
    """Relative pose of b as seen from a, so compose(a, between(a, b)) == b."""
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    dx = b.x - a.x
    dy = b.y - a.y
    return Pose2(c * dx + s * dy, -s * dx + c * dy, b.theta - a.theta)


def to_local(pose: Pose2, p: Point2) -> Point2:
    """Express a global point in the frame of pose."""
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    dx = p.x - pose.x
    dy = p.y - pose.y
    return Point2(c * dx + s * dy, -s * dx + c * dy)


def to_global(pose: Pose2, p_local: Point2) -> Point2:
    """Map a point from the frame of pose to the global frame."""
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    return Point2(pose.x + c * p_local.x - s * p_local.y,
                  pose.y + s * p_local.x + c * p_local.y)


def jacobians_between(a: Pose2, b: Pose2):
    """Jacobians of between(a, b) with respect to a and b (3x3 each)."""
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    dx = b.x - a.x
    dy = b.y - a.y
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    ja = np.array([
        [-c, -s, ly],
        [s, -c, -lx],
        [0.0, 0.0, -1.0],
    ])
    jb = np.array([
        [c, s, 0.0],
        [-s, c, 0.0],
        [0.0, 0.0, 1.0],
    ])
    return ja, jb


def jacobians_to_local(pose: Pose2, p: Point2):
    """Jacobians of to_local(pose, p): 2x3 w.r.t. pose and 2x2 w.r.t. the point."""
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    dx = p.x - pose.x
    dy = p.y - pose.y
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    jpose = np.array([
        [-c, -s, ly],
        [s, -c, -lx],
    ])
    jpoint = np.array([
        [c, s],
        [-s, c],
    ])
    return jpose, jpoint


def poses_to_array(poses) -> np.ndarray:
    """Stack poses into an (n, 3) float array."""
    out = np.empty((len(poses), 3), dtype=float)
    for i, p in enumerate(poses):
        out[i, 0] = p.x
        out[i, 1] = p.y
        out[i, 2] = p.theta
    return out


def poses_from_array(arr) -> list:
    return [Pose2(float(r[0]), float(r[1]), float(r[2])) for r in arr]
