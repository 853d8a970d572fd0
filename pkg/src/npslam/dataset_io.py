"""Line-oriented dataset files and the parallel ground-truth side channel.

Dataset format, one record per line, `#` starts a comment:

    HEADER <num_classes> <x0> <y0> <theta0>
    ODOM <t> <dx> <dy> <dtheta> <qxx> <qyy> <qtt>
    DET <t> <k> <class> <zx> <zy> <rxx> <ryy>

Covariances are stored as diagonals; floats are written with shortest
round-trip precision so load(save(d)) is bit-exact. The truth file
(`<path>.truth`) holds TPOSE/TOBJ/SRC records and is never read by the
inference code.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .models import Dataset, Detection, ModelError, Odometry
from .se2 import Point2, Pose2
from .simulate import GroundTruth


class ParseError(ValueError):
    """A dataset or truth file line could not be parsed."""


class ValidationError(ValueError):
    """A parsed file violates dataset invariants."""


def _fmt(v: float) -> str:
    return repr(float(v))


def _is_diag(m: np.ndarray) -> bool:
    return float(np.abs(m - np.diag(np.diag(m))).max()) == 0.0


def save_dataset(dataset: Dataset, path) -> None:
    lines = ["# npslam dataset"]
    p0 = dataset.initial_pose
    lines.append(f"HEADER {dataset.num_classes} {_fmt(p0.x)} {_fmt(p0.y)} {_fmt(p0.theta)}")
    for o in dataset.odometry:
        if not _is_diag(o.cov_Q):
            raise ValidationError("file format stores diagonal odometry covariances only")
        q = np.diag(o.cov_Q)
        lines.append(
            f"ODOM {o.t} {_fmt(o.delta.x)} {_fmt(o.delta.y)} {_fmt(o.delta.theta)} "
            f"{_fmt(q[0])} {_fmt(q[1])} {_fmt(q[2])}")
    for d in dataset.sorted_detections():
        if not _is_diag(d.cov_R):
            raise ValidationError("file format stores diagonal measurement covariances only")
        r = np.diag(d.cov_R)
        lines.append(
            f"DET {d.t} {d.k} {d.u} {_fmt(d.z.x)} {_fmt(d.z.y)} "
            f"{_fmt(r[0])} {_fmt(r[1])}")
    Path(path).write_text("\n".join(lines) + "\n")


def _records(path):
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def _floats(fields, lineno):
    try:
        return [float(f) for f in fields]
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad number in {fields}") from exc


def _ints(fields, lineno):
    try:
        return [int(f) for f in fields]
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad integer in {fields}") from exc


def load_dataset(path) -> Dataset:
    num_classes = 0
    initial_pose = Pose2()
    odo = []
    dets = []
    saw_header = False
    for lineno, fields in _records(path):
        tag = fields[0]
        if tag == "HEADER":
            if len(fields) != 5:
                raise ParseError(f"line {lineno}: HEADER needs 4 fields")
            num_classes = _ints(fields[1:2], lineno)[0]
            x, y, th = _floats(fields[2:5], lineno)
            initial_pose = Pose2(x, y, th)
            saw_header = True
        elif tag == "ODOM":
            if len(fields) != 8:
                raise ParseError(f"line {lineno}: ODOM needs 7 fields")
            t = _ints(fields[1:2], lineno)[0]
            dx, dy, dth, qx, qy, qt = _floats(fields[2:8], lineno)
            odo.append((lineno, t, Pose2(dx, dy, dth), np.diag([qx, qy, qt])))
        elif tag == "DET":
            if len(fields) != 8:
                raise ParseError(f"line {lineno}: DET needs 7 fields")
            t, k, u = _ints(fields[1:4], lineno)
            zx, zy, rx, ry = _floats(fields[4:8], lineno)
            dets.append((lineno, t, k, u, Point2(zx, zy), np.diag([rx, ry])))
        else:
            raise ParseError(f"line {lineno}: unknown record type {tag!r}")
    if (odo or dets) and not saw_header:
        raise ValidationError("missing HEADER record")
    odo.sort(key=lambda r: r[1])
    expect = 1
    for lineno, t, delta, cov in odo:
        if t != expect:
            raise ValidationError(
                f"odometry not contiguous: expected t={expect}, "
                f"got t={t} (line {lineno})")
        expect += 1
    try:
        return Dataset(
            [Odometry(t, delta, cov) for _, t, delta, cov in odo],
            [Detection(t, k, z, u, cov) for _, t, k, u, z, cov in dets],
            num_classes, initial_pose)
    except ModelError as exc:
        raise ValidationError(str(exc)) from exc


def save_truth(truth: GroundTruth, path) -> None:
    lines = ["# npslam ground truth"]
    for t, p in enumerate(truth.poses):
        lines.append(f"TPOSE {t} {_fmt(p.x)} {_fmt(p.y)} {_fmt(p.theta)}")
    for i, (pos, cls) in enumerate(truth.objects):
        lines.append(f"TOBJ {i} {_fmt(pos.x)} {_fmt(pos.y)} {cls}")
    for (t, k) in sorted(truth.detection_sources):
        lines.append(f"SRC {t} {k} {truth.detection_sources[(t, k)]}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_truth(path) -> GroundTruth:
    poses = {}
    objects = {}
    sources = {}
    for lineno, fields in _records(path):
        tag = fields[0]
        if tag == "TPOSE":
            if len(fields) != 5:
                raise ParseError(f"line {lineno}: TPOSE needs 4 fields")
            t = _ints(fields[1:2], lineno)[0]
            x, y, th = _floats(fields[2:5], lineno)
            poses[t] = Pose2(x, y, th)
        elif tag == "TOBJ":
            if len(fields) != 5:
                raise ParseError(f"line {lineno}: TOBJ needs 4 fields")
            i = _ints(fields[1:2], lineno)[0]
            x, y = _floats(fields[2:4], lineno)
            cls = _ints(fields[4:5], lineno)[0]
            objects[i] = (Point2(x, y), cls)
        elif tag == "SRC":
            if len(fields) != 4:
                raise ParseError(f"line {lineno}: SRC needs 3 fields")
            t, k, src = _ints(fields[1:4], lineno)
            sources[(t, k)] = src
        else:
            raise ParseError(f"line {lineno}: unknown record type {tag!r}")
    if sorted(poses) != list(range(len(poses))):
        raise ValidationError("truth poses not contiguous from t=0")
    if sorted(objects) != list(range(len(objects))):
        raise ValidationError("truth object ids not contiguous from 0")
    return GroundTruth([poses[t] for t in sorted(poses)],
                       [objects[i] for i in sorted(objects)], sources)


def truth_path(dataset_path) -> Path:
    return Path(str(dataset_path) + ".truth")
