"""Pure-numpy implementations of the hot kernels.

Reference semantics for the numba backend: same arithmetic, same tie
breaking, same in-place mutation contract. Selected when numba is
unavailable or NPSLAM_DISABLE_NUMBA is set.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angles(theta):
    """Vectorized wrap to (-pi, pi]."""
    w = np.mod(theta + np.pi, TWO_PI) - np.pi
    if np.ndim(w) == 0:
        return np.pi if w <= -np.pi else float(w)
    w[w <= -np.pi] = np.pi
    return w


def odom_terms(poses, ot, delta, sqrtinfo):
    """Whitened odometry residuals and Jacobians for all factors at once.

    poses: (n, 3); ot: (T,) target time indices; delta: (T, 3) measured
    relative poses; sqrtinfo: (T, 3, 3) upper Cholesky factors of Q^-1.
    Returns whitened (res (T,3), J wrt earlier pose (T,3,3), J wrt later (T,3,3)).
    """
    pa = poses[ot - 1]
    pb = poses[ot]
    c = np.cos(pa[:, 2])
    s = np.sin(pa[:, 2])
    dx = pb[:, 0] - pa[:, 0]
    dy = pb[:, 1] - pa[:, 1]
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    n = ot.size
    r = np.empty((n, 3))
    r[:, 0] = lx - delta[:, 0]
    r[:, 1] = ly - delta[:, 1]
    r[:, 2] = wrap_angles(pb[:, 2] - pa[:, 2] - delta[:, 2])
    ja = np.zeros((n, 3, 3))
    ja[:, 0, 0] = -c
    ja[:, 0, 1] = -s
    ja[:, 0, 2] = ly
    ja[:, 1, 0] = s
    ja[:, 1, 1] = -c
    ja[:, 1, 2] = -lx
    ja[:, 2, 2] = -1.0
    jb = np.zeros((n, 3, 3))
    jb[:, 0, 0] = c
    jb[:, 0, 1] = s
    jb[:, 1, 0] = -s
    jb[:, 1, 1] = c
    jb[:, 2, 2] = 1.0
    rw = np.einsum("nij,nj->ni", sqrtinfo, r)
    jaw = np.einsum("nij,njk->nik", sqrtinfo, ja)
    jbw = np.einsum("nij,njk->nik", sqrtinfo, jb)
    return rw, jaw, jbw


def odom_residuals(poses, ot, delta, sqrtinfo):
    """Whitened odometry residuals only (cheap chi2 evaluation)."""
    pa = poses[ot - 1]
    pb = poses[ot]
    c = np.cos(pa[:, 2])
    s = np.sin(pa[:, 2])
    dx = pb[:, 0] - pa[:, 0]
    dy = pb[:, 1] - pa[:, 1]
    r = np.empty((ot.size, 3))
    r[:, 0] = c * dx + s * dy - delta[:, 0]
    r[:, 1] = -s * dx + c * dy - delta[:, 1]
    r[:, 2] = wrap_angles(pb[:, 2] - pa[:, 2] - delta[:, 2])
    return np.einsum("nij,nj->ni", sqrtinfo, r)


def meas_terms(poses, lpos, dt, dl, dz, sqrtinfo):
    """Whitened measurement residuals and Jacobians for all detections.

    lpos: (M, 2) landmark positions; dt/dl: (D,) pose and landmark indices;
    dz: (D, 2) local measurements; sqrtinfo: (D, 2, 2) upper Cholesky of R^-1.
    Returns whitened (res (D,2), J wrt pose (D,2,3), J wrt landmark (D,2,2)).
    """
    px = poses[dt]
    c = np.cos(px[:, 2])
    s = np.sin(px[:, 2])
    dx = lpos[dl, 0] - px[:, 0]
    dy = lpos[dl, 1] - px[:, 1]
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    n = dt.size
    r = np.empty((n, 2))
    r[:, 0] = lx - dz[:, 0]
    r[:, 1] = ly - dz[:, 1]
    jx = np.empty((n, 2, 3))
    jx[:, 0, 0] = -c
    jx[:, 0, 1] = -s
    jx[:, 0, 2] = ly
    jx[:, 1, 0] = s
    jx[:, 1, 1] = -c
    jx[:, 1, 2] = -lx
    jl = np.empty((n, 2, 2))
    jl[:, 0, 0] = c
    jl[:, 0, 1] = s
    jl[:, 1, 0] = -s
    jl[:, 1, 1] = c
    rw = np.einsum("nij,nj->ni", sqrtinfo, r)
    jxw = np.einsum("nij,njk->nik", sqrtinfo, jx)
    jlw = np.einsum("nij,njk->nik", sqrtinfo, jl)
    return rw, jxw, jlw


def meas_residuals(poses, lpos, dt, dl, dz, sqrtinfo):
    """Whitened measurement residuals only."""
    px = poses[dt]
    c = np.cos(px[:, 2])
    s = np.sin(px[:, 2])
    dx = lpos[dl, 0] - px[:, 0]
    dy = lpos[dl, 1] - px[:, 1]
    r = np.empty((dt.size, 2))
    r[:, 0] = c * dx + s * dy - dz[:, 0]
    r[:, 1] = -s * dx + c * dy - dz[:, 1]
    return np.einsum("nij,nj->ni", sqrtinfo, r)


def sweep_assign(det_global, det_u, det_w, new_logpi, lm_sum, lm_count,
                 lm_logpi, assign, n_slots, alpha, rho_new):
    """Sequential maximum-likelihood reassignment sweep over all detections.

    Each detection, in input order, is removed from its current slot and
    re-assigned to the best-scoring slot (existing objects weighted by their
    member counts, a fresh slot weighted by alpha and the density floor).
    Slot sums/counts are the running per-slot totals of member global
    positions; all slot arrays and `assign` are mutated in place.

    Tie breaking: lowest slot index wins; existing slots win against the
    fresh-slot hypothesis. Returns the new slot count.
    """
    D = det_global.shape[0]
    if D == 0:
        return n_slots
    log_denom = math.log(D - 1 + alpha)
    log_alpha = math.log(alpha)
    for d in range(D):
        j = assign[d]
        gx = det_global[d, 0]
        gy = det_global[d, 1]
        lm_sum[j, 0] -= gx
        lm_sum[j, 1] -= gy
        lm_count[j] -= 1.0
        u = det_u[d]
        counts = lm_count[:n_slots]
        act = np.nonzero(counts > 0.0)[0]
        best = -1
        if act.size:
            cnt = counts[act]
            ddx = lm_sum[act, 0] / cnt - gx
            ddy = lm_sum[act, 1] / cnt - gy
            mahal = (det_w[d, 0] * ddx * ddx
                     + 2.0 * det_w[d, 1] * ddx * ddy
                     + det_w[d, 2] * ddy * ddy)
            scores = np.log(cnt) - log_denom + lm_logpi[act, u] - 0.5 * mahal
            bi = int(np.argmax(scores))
            new_score = log_alpha - log_denom + new_logpi[u] + rho_new
            if scores[bi] >= new_score:
                best = int(act[bi])
        if best < 0:
            best = n_slots
            lm_sum[best, 0] = 0.0
            lm_sum[best, 1] = 0.0
            lm_count[best] = 0.0
            lm_logpi[best, :] = new_logpi
            n_slots += 1
        lm_sum[best, 0] += gx
        lm_sum[best, 1] += gy
        lm_count[best] += 1.0
        assign[d] = best
    return n_slots
