"""Pose-graph state and the sparse nonlinear least-squares solver.

The graph holds poses X_0..X_T, landmarks, and the detection-to-landmark
association. Optimization runs Levenberg-Marquardt on the whitened residuals
of all odometry and measurement factors. Gauge freedom is resolved by fixing
X_0 (it is excluded from the state vector), so metric comparisons against
ground truth need no alignment step.

State ordering is poses 1..T then landmarks in ascending id, fixed for
reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .beliefs import ClassBelief
from .models import ConsistencyError, Dataset
from .se2 import Point2, Pose2, compose, normalize_angle, poses_to_array, to_global


class SolverError(RuntimeError):
    """The normal equations could not be solved or the graph is defective."""


@dataclass
class Landmark:
    """An object hypothesis: stable id, position, class belief, member count."""

    id: int
    position: Point2
    belief: ClassBelief
    count_m: int = 0


@dataclass
class SolverSettings:
    max_iterations: int = 50
    rel_decrease_tol: float = 1e-8
    abs_gradient_tol: float = 1e-10
    initial_lm_damping: float = 1e-4

    def __post_init__(self):
        for name in ("max_iterations", "rel_decrease_tol", "abs_gradient_tol",
                     "initial_lm_damping"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class PoseGraph:
    poses: list
    landmarks: dict
    dataset: Dataset
    assoc: dict
    gauge: Pose2 = field(default_factory=Pose2)

    @property
    def num_odometry_factors(self) -> int:
        return len(self.dataset.odometry)

    @property
    def num_measurement_factors(self) -> int:
        return len(self.dataset.detections)


@dataclass
class SolveResult:
    poses: list
    landmark_positions: dict
    chi2: float
    iterations: int
    accepted_chi2: list
    converged: bool
    grad_inf_norm: float


def dead_reckon(dataset: Dataset) -> list:
    """Open-loop pose prediction by chaining odometry from the initial pose."""
    poses = [dataset.initial_pose]
    for o in dataset.odometry:
        poses.append(compose(poses[-1], o.delta))
    return poses


def landmark_means(dataset: Dataset, assoc: dict, poses: list) -> dict:
    """Landmark positions as means of globally mapped associated detections."""
    sums: dict = {}
    counts: dict = {}
    for d in dataset.sorted_detections():
        lid = assoc[d.key]
        g = to_global(poses[d.t], d.z)
        if lid in sums:
            sums[lid][0] += g.x
            sums[lid][1] += g.y
            counts[lid] += 1
        else:
            sums[lid] = [g.x, g.y]
            counts[lid] = 1
    return {lid: Point2(sx / counts[lid], sy / counts[lid])
            for lid, (sx, sy) in sums.items()}


def build_graph(dataset: Dataset, assoc, init_poses, init_landmarks) -> PoseGraph:
    """Assemble a pose graph, validating the association against the dataset."""
    if not isinstance(assoc, dict):
        pairs = list(assoc)
        assoc = {}
        for key, lid in pairs:
            key = tuple(key)
            if key in assoc:
                raise ConsistencyError(f"duplicate association key {key}")
            assoc[key] = lid
    if len(init_poses) != dataset.num_poses:
        raise ConsistencyError(
            f"graph needs {dataset.num_poses} poses, got {len(init_poses)}")
    landmarks = {}
    lms = init_landmarks.values() if isinstance(init_landmarks, dict) else init_landmarks
    for lm in lms:
        if lm.id in landmarks:
            raise ConsistencyError(f"duplicate landmark id {lm.id}")
        landmarks[lm.id] = Landmark(lm.id, lm.position, lm.belief, 0)
    det_keys = {d.key for d in dataset.detections}
    for d in dataset.detections:
        if d.key not in assoc:
            raise ConsistencyError(f"detection {d.key} has no association")
        lid = assoc[d.key]
        if lid not in landmarks:
            raise ConsistencyError(
                f"association of {d.key} references missing landmark {lid}")
        landmarks[lid].count_m += 1
    for key in assoc:
        if key not in det_keys:
            raise ConsistencyError(f"association key {key} matches no detection")
    return PoseGraph(list(init_poses), landmarks, dataset, dict(assoc),
                     gauge=init_poses[0])


def _sqrt_infos(covs: np.ndarray) -> np.ndarray:
    # S = L^-1 with C = L L^T, so that |S r|^2 = r^T C^-1 r
    chol = np.linalg.cholesky(covs)
    eye = np.broadcast_to(np.eye(covs.shape[-1]), covs.shape)
    return np.linalg.solve(chol, eye.copy())


class _Arrays:
    """Flat array view of a graph, fixed factor structure."""

    def __init__(self, graph: PoseGraph):
        ds = graph.dataset
        self.T = len(ds.odometry)
        self.lm_ids = sorted(graph.landmarks)
        self.M = len(self.lm_ids)
        lid_to_idx = {lid: j for j, lid in enumerate(self.lm_ids)}

        self.ot = np.array([o.t for o in ds.odometry], dtype=np.int64)
        self.odelta = np.array(
            [[o.delta.x, o.delta.y, o.delta.theta] for o in ds.odometry]
        ).reshape(self.T, 3)
        self.osqi = (_sqrt_infos(np.array([o.cov_Q for o in ds.odometry]))
                     if self.T else np.empty((0, 3, 3)))

        dets = ds.sorted_detections()
        self.D = len(dets)
        self.dt = np.array([d.t for d in dets], dtype=np.int64)
        self.dl = np.array([lid_to_idx[graph.assoc[d.key]] for d in dets],
                           dtype=np.int64)
        self.dz = np.array([[d.z.x, d.z.y] for d in dets]).reshape(self.D, 2)
        self.dsqi = (_sqrt_infos(np.array([d.cov_R for d in dets]))
                     if self.D else np.empty((0, 2, 2)))

        self.dim = 3 * self.T + 2 * self.M
        self._build_triplet_index()

    def _build_triplet_index(self):
        # Column layout: pose t (1..T) -> 3(t-1)..; landmark j -> 3T + 2j.
        # X_0 is gauged out, so factors touching it contribute no columns.
        rows = []
        cols = []
        self.oa_mask = self.ot >= 2
        T, D = self.T, self.D
        if T:
            f = np.arange(T)
            fa = f[self.oa_mask]
            r = (3 * fa[:, None, None] + np.arange(3)[:, None]).repeat(3, axis=2)
            c = (3 * (self.ot[fa] - 2)[:, None, None] + np.arange(3)[None, None, :]
                 ).repeat(3, axis=1)
            rows.append(r.ravel())
            cols.append(c.ravel())
            r = (3 * f[:, None, None] + np.arange(3)[:, None]).repeat(3, axis=2)
            c = (3 * (self.ot - 1)[:, None, None] + np.arange(3)[None, None, :]
                 ).repeat(3, axis=1)
            rows.append(r.ravel())
            cols.append(c.ravel())
        self.dx_mask = self.dt >= 1
        if D:
            f = np.arange(D)
            fx = f[self.dx_mask]
            r = (3 * T + 2 * fx[:, None, None] + np.arange(2)[:, None]).repeat(3, axis=2)
            c = (3 * (self.dt[fx] - 1)[:, None, None] + np.arange(3)[None, None, :]
                 ).repeat(2, axis=1)
            rows.append(r.ravel())
            cols.append(c.ravel())
            r = (3 * T + 2 * f[:, None, None] + np.arange(2)[:, None]).repeat(2, axis=2)
            c = (3 * T + 2 * self.dl[:, None, None] + np.arange(2)[None, None, :]
                 ).repeat(2, axis=1)
            rows.append(r.ravel())
            cols.append(c.ravel())
        if rows:
            self.jac_rows = np.concatenate(rows)
            self.jac_cols = np.concatenate(cols)
        else:
            self.jac_rows = np.empty(0, dtype=np.int64)
            self.jac_cols = np.empty(0, dtype=np.int64)
        self.num_rows = 3 * T + 2 * D

    def state_from(self, poses, lpos: np.ndarray) -> np.ndarray:
        x = np.empty(self.dim)
        pa = poses_to_array(poses)
        x[: 3 * self.T] = pa[1:].ravel()
        x[3 * self.T:] = lpos.ravel()
        return x

    def unpack(self, x: np.ndarray, pose0: Pose2):
        poses = np.empty((self.T + 1, 3))
        poses[0] = [pose0.x, pose0.y, pose0.theta]
        poses[1:] = x[: 3 * self.T].reshape(self.T, 3)
        lpos = x[3 * self.T:].reshape(self.M, 2)
        return poses, lpos

    def residuals(self, poses_arr, lpos) -> np.ndarray:
        ro = kernels.odom_residuals(poses_arr, self.ot, self.odelta, self.osqi)
        rm = kernels.meas_residuals(poses_arr, lpos, self.dt, self.dl, self.dz,
                                    self.dsqi)
        return np.concatenate([ro.ravel(), rm.ravel()])

    def jacobian(self, poses_arr, lpos):
        ro, ja, jb = kernels.odom_terms(poses_arr, self.ot, self.odelta, self.osqi)
        rm, jx, jl = kernels.meas_terms(poses_arr, lpos, self.dt, self.dl,
                                        self.dz, self.dsqi)
        parts = []
        if self.T:
            parts.append(ja[self.oa_mask].ravel())
            parts.append(jb.ravel())
        if self.D:
            parts.append(jx[self.dx_mask].ravel())
            parts.append(jl.ravel())
        data = np.concatenate(parts) if parts else np.empty(0)
        J = sp.coo_matrix((data, (self.jac_rows, self.jac_cols)),
                          shape=(self.num_rows, self.dim)).tocsr()
        r = np.concatenate([ro.ravel(), rm.ravel()])
        return J, r


def _graph_arrays(graph: PoseGraph):
    arrs = _Arrays(graph)
    lpos = np.array([[graph.landmarks[lid].position.x,
                      graph.landmarks[lid].position.y]
                     for lid in arrs.lm_ids]).reshape(arrs.M, 2)
    return arrs, lpos


def chi2(graph: PoseGraph) -> float:
    """Sum of squared whitened residuals: -2x the position/odometry factors."""
    arrs, lpos = _graph_arrays(graph)
    poses_arr = poses_to_array(graph.poses)
    r = arrs.residuals(poses_arr, lpos)
    return float(r @ r)


_LAM_MAX = 1e12
_LAM_MIN = 1e-12


def _describe_state_index(arrs: _Arrays, idx: int) -> str:
    if idx < 3 * arrs.T:
        comp = "xyt"[idx % 3]
        return f"pose t={idx // 3 + 1} component {comp}"
    j = (idx - 3 * arrs.T) // 2
    return f"landmark id={arrs.lm_ids[j]}"


def optimize(graph: PoseGraph, settings: SolverSettings | None = None) -> SolveResult:
    """Levenberg-Marquardt over poses and landmark positions, X_0 held fixed.

    Damping is multiplicative on the normal-equation diagonal (x10 on a
    rejected step, /10 on an accepted one). Accepted steps never increase
    chi2. Raises SolverError when the damped system stays singular or a
    landmark has no supporting detection.
    """
    settings = settings or SolverSettings()
    for lid in sorted(graph.landmarks):
        if graph.landmarks[lid].count_m < 1:
            raise SolverError(f"landmark id={lid} has no associated detections")
    arrs, lpos0 = _graph_arrays(graph)
    x = arrs.state_from(graph.poses, lpos0)
    pose0 = graph.poses[0]

    def unpack_eval(xv):
        poses_arr, lpos = arrs.unpack(xv, pose0)
        r = arrs.residuals(poses_arr, lpos)
        return poses_arr, lpos, r

    poses_arr, lpos, r = unpack_eval(x)
    cur = float(r @ r)
    history = [cur]
    grad_inf = 0.0
    if arrs.dim == 0:
        return _result(graph, arrs, poses_arr, lpos, cur, 0, history, True, grad_inf)

    lam = settings.initial_lm_damping
    accepted_steps = 0
    converged = False
    for _ in range(settings.max_iterations):
        J, r = arrs.jacobian(poses_arr, lpos)
        g = J.T @ r
        grad_inf = float(np.max(np.abs(2.0 * g)))
        if grad_inf <= settings.abs_gradient_tol * (1.0 + cur):
            converged = True
            break
        H = (J.T @ J).tocsc()
        dh = H.diagonal()
        if np.any(dh <= 0.0):
            idx = int(np.argmin(dh))
            raise SolverError(
                f"zero curvature on {_describe_state_index(arrs, idx)}; "
                "normal equations singular")
        accepted = False
        numeric_failure = False
        rel = 0.0
        while lam <= _LAM_MAX:
            A = (H + sp.diags(lam * dh)).tocsc()
            try:
                delta = spla.splu(A).solve(-g)
                ok = bool(np.all(np.isfinite(delta)))
            except RuntimeError:
                ok = False
            if not ok:
                numeric_failure = True
                lam *= 10.0
                continue
            numeric_failure = False
            x_new = x + delta
            # keep headings wrapped so residual wrapping stays consistent
            x_new[2: 3 * arrs.T: 3] = kernels.wrap_angles(x_new[2: 3 * arrs.T: 3])
            poses_new, lpos_new, r_new = unpack_eval(x_new)
            new = float(r_new @ r_new)
            if new <= cur:
                rel = (cur - new) / cur if cur > 0.0 else 0.0
                x, poses_arr, lpos, cur = x_new, poses_new, lpos_new, new
                history.append(cur)
                lam = max(lam * 0.1, _LAM_MIN)
                accepted = True
                accepted_steps += 1
                break
            lam *= 10.0
        if not accepted:
            if numeric_failure:
                raise SolverError(
                    f"normal equations singular even at damping {lam:.1e}")
            converged = True
            break
        if rel < settings.rel_decrease_tol:
            converged = True
            break
    return _result(graph, arrs, poses_arr, lpos, cur, accepted_steps, history,
                   converged, grad_inf)


def _result(graph, arrs, poses_arr, lpos, cur, iters, history, converged,
            grad_inf) -> SolveResult:
    poses = [graph.poses[0]] + [
        Pose2(float(p[0]), float(p[1]), normalize_angle(float(p[2])))
        for p in poses_arr[1:]
    ]
    lm_positions = {lid: Point2(float(lpos[j, 0]), float(lpos[j, 1]))
                    for j, lid in enumerate(arrs.lm_ids)}
    return SolveResult(poses, lm_positions, cur, iters, history, converged,
                       grad_inf)


def hessian_block_pattern(graph: PoseGraph) -> set:
    """Nonzero block pairs of J^T J: ('pose', t) and ('lm', id) labels.

    Structural view used to verify sparsity: poses couple only to adjacent
    poses and observed landmarks; landmarks never couple to each other.
    """
    arrs, lpos = _graph_arrays(graph)
    poses_arr = poses_to_array(graph.poses)
    J, _ = arrs.jacobian(poses_arr, lpos)
    H = (J.T @ J).tocoo()

    def label(idx):
        if idx < 3 * arrs.T:
            return ("pose", idx // 3 + 1)
        return ("lm", arrs.lm_ids[(idx - 3 * arrs.T) // 2])

    pattern = set()
    for i, j, v in zip(H.row, H.col, H.data):
        if v != 0.0:
            pattern.add((label(int(i)), label(int(j))))
    return pattern
