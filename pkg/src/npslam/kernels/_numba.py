"""Numba-compiled hot kernels. Same contracts as kernels._numpy."""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _wrap(theta):
    a = theta + math.pi
    a -= TWO_PI * math.floor(a / TWO_PI)
    a -= math.pi
    if a <= -math.pi:
        a = math.pi
    return a


@njit(cache=True)
def odom_terms(poses, ot, delta, sqrtinfo):
    n = ot.size
    rw = np.empty((n, 3))
    jaw = np.empty((n, 3, 3))
    jbw = np.empty((n, 3, 3))
    r = np.empty(3)
    ja = np.zeros((3, 3))
    jb = np.zeros((3, 3))
    for f in range(n):
        a = ot[f] - 1
        b = ot[f]
        c = math.cos(poses[a, 2])
        s = math.sin(poses[a, 2])
        dx = poses[b, 0] - poses[a, 0]
        dy = poses[b, 1] - poses[a, 1]
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        r[0] = lx - delta[f, 0]
        r[1] = ly - delta[f, 1]
        r[2] = _wrap(poses[b, 2] - poses[a, 2] - delta[f, 2])
        ja[0, 0] = -c
        ja[0, 1] = -s
        ja[0, 2] = ly
        ja[1, 0] = s
        ja[1, 1] = -c
        ja[1, 2] = -lx
        ja[2, 2] = -1.0
        jb[0, 0] = c
        jb[0, 1] = s
        jb[1, 0] = -s
        jb[1, 1] = c
        jb[2, 2] = 1.0
        for i in range(3):
            acc = 0.0
            for k in range(3):
                acc += sqrtinfo[f, i, k] * r[k]
            rw[f, i] = acc
            for jcol in range(3):
                acc_a = 0.0
                acc_b = 0.0
                for k in range(3):
                    acc_a += sqrtinfo[f, i, k] * ja[k, jcol]
                    acc_b += sqrtinfo[f, i, k] * jb[k, jcol]
                jaw[f, i, jcol] = acc_a
                jbw[f, i, jcol] = acc_b
    return rw, jaw, jbw


@njit(cache=True)
def odom_residuals(poses, ot, delta, sqrtinfo):
    n = ot.size
    rw = np.empty((n, 3))
    r = np.empty(3)
    for f in range(n):
        a = ot[f] - 1
        b = ot[f]
        c = math.cos(poses[a, 2])
        s = math.sin(poses[a, 2])
        dx = poses[b, 0] - poses[a, 0]
        dy = poses[b, 1] - poses[a, 1]
        r[0] = c * dx + s * dy - delta[f, 0]
        r[1] = -s * dx + c * dy - delta[f, 1]
        r[2] = _wrap(poses[b, 2] - poses[a, 2] - delta[f, 2])
        for i in range(3):
            acc = 0.0
            for k in range(3):
                acc += sqrtinfo[f, i, k] * r[k]
            rw[f, i] = acc
    return rw


@njit(cache=True)
def meas_terms(poses, lpos, dt, dl, dz, sqrtinfo):
    n = dt.size
    rw = np.empty((n, 2))
    jxw = np.empty((n, 2, 3))
    jlw = np.empty((n, 2, 2))
    r = np.empty(2)
    jx = np.empty((2, 3))
    jl = np.empty((2, 2))
    for f in range(n):
        t = dt[f]
        m = dl[f]
        c = math.cos(poses[t, 2])
        s = math.sin(poses[t, 2])
        dx = lpos[m, 0] - poses[t, 0]
        dy = lpos[m, 1] - poses[t, 1]
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        r[0] = lx - dz[f, 0]
        r[1] = ly - dz[f, 1]
        jx[0, 0] = -c
        jx[0, 1] = -s
        jx[0, 2] = ly
        jx[1, 0] = s
        jx[1, 1] = -c
        jx[1, 2] = -lx
        jl[0, 0] = c
        jl[0, 1] = s
        jl[1, 0] = -s
        jl[1, 1] = c
        for i in range(2):
            acc = 0.0
            for k in range(2):
                acc += sqrtinfo[f, i, k] * r[k]
            rw[f, i] = acc
            for jcol in range(3):
                acc_x = 0.0
                for k in range(2):
                    acc_x += sqrtinfo[f, i, k] * jx[k, jcol]
                jxw[f, i, jcol] = acc_x
            for jcol in range(2):
                acc_l = 0.0
                for k in range(2):
                    acc_l += sqrtinfo[f, i, k] * jl[k, jcol]
                jlw[f, i, jcol] = acc_l
    return rw, jxw, jlw


@njit(cache=True)
def meas_residuals(poses, lpos, dt, dl, dz, sqrtinfo):
    n = dt.size
    rw = np.empty((n, 2))
    r = np.empty(2)
    for f in range(n):
        t = dt[f]
        m = dl[f]
        c = math.cos(poses[t, 2])
        s = math.sin(poses[t, 2])
        dx = lpos[m, 0] - poses[t, 0]
        dy = lpos[m, 1] - poses[t, 1]
        r[0] = c * dx + s * dy - dz[f, 0]
        r[1] = -s * dx + c * dy - dz[f, 1]
        for i in range(2):
            acc = 0.0
            for k in range(2):
                acc += sqrtinfo[f, i, k] * r[k]
            rw[f, i] = acc
    return rw


@njit(cache=True)
def sweep_assign(det_global, det_u, det_w, new_logpi, lm_sum, lm_count,
                 lm_logpi, assign, n_slots, alpha, rho_new):
    D = det_global.shape[0]
    if D == 0:
        return n_slots
    log_denom = math.log(D - 1.0 + alpha)
    log_alpha = math.log(alpha)
    for d in range(D):
        j = assign[d]
        gx = det_global[d, 0]
        gy = det_global[d, 1]
        lm_sum[j, 0] -= gx
        lm_sum[j, 1] -= gy
        lm_count[j] -= 1.0
        u = det_u[d]
        w00 = det_w[d, 0]
        w01 = det_w[d, 1]
        w11 = det_w[d, 2]
        best = -1
        best_score = -np.inf
        for i in range(n_slots):
            cnt = lm_count[i]
            if cnt <= 0.0:
                continue
            ddx = lm_sum[i, 0] / cnt - gx
            ddy = lm_sum[i, 1] / cnt - gy
            mahal = w00 * ddx * ddx + 2.0 * w01 * ddx * ddy + w11 * ddy * ddy
            sc = math.log(cnt) - log_denom + lm_logpi[i, u] - 0.5 * mahal
            if sc > best_score:
                best_score = sc
                best = i
        new_score = log_alpha - log_denom + new_logpi[u] + rho_new
        if best < 0 or best_score < new_score:
            best = n_slots
            lm_sum[best, 0] = 0.0
            lm_sum[best, 1] = 0.0
            lm_count[best] = 0.0
            for q in range(new_logpi.size):
                lm_logpi[best, q] = new_logpi[q]
            n_slots += 1
        lm_sum[best, 0] += gx
        lm_sum[best, 1] += gy
        lm_count[best] += 1.0
        assign[d] = best
    return n_slots
