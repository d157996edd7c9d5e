# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evaluation kernel for the log-barrier sweeps.

Semantically identical to ``_ref``; the per-atom scatter/gather loops run in
C while the dense row-space products stay in BLAS through numpy.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log, sqrt

cnp.import_array()


cdef int _values(pm, double[::1] y, double[::1] g, double* F_out,
                 double[::1] ra_u, double[::1] qg_u, double[::1] qg_q,
                 double[::1] rb_u, double[::1] rb_v,
                 double[::1] sq_u, double[::1] lg_u) except -1:
    """Fill constraint values g and objective value; return 0 if out of domain."""
    cdef double F = pm.obj_const
    cdef double[::1] con_const = pm.con_const
    cdef Py_ssize_t j, k
    cdef long tgt
    cdef double v, u, w

    for j in range(g.shape[0]):
        g[j] = con_const[j]

    cdef long[::1] aff_row = pm.aff_row
    cdef long[::1] aff_tgt = pm.aff_tgt
    for k in range(aff_row.shape[0]):
        v = y[aff_row[k]]
        tgt = aff_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    cdef long[::1] q_row = pm.q_row
    cdef long[::1] q_tgt = pm.q_tgt
    cdef double[::1] q_w = pm.q_w
    for k in range(q_row.shape[0]):
        v = y[q_row[k]]
        v = q_w[k] * v * v
        tgt = q_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    cdef long[::1] ra_row = pm.ra_row
    cdef long[::1] ra_tgt = pm.ra_tgt
    cdef double[::1] ra_c0 = pm.ra_c0
    cdef double[::1] ra_cu = pm.ra_cu
    for k in range(ra_row.shape[0]):
        u = y[ra_row[k]] + ra_cu[k]
        if u <= 0.0:
            return 0
        ra_u[k] = u
        v = ra_c0[k] / u
        tgt = ra_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    cdef long[::1] qg_brow = pm.qg_brow
    cdef long[::1] qg_tgt = pm.qg_tgt
    cdef double[::1] qg_cb = pm.qg_cb
    cdef long[::1] qn_row = pm.qn_row
    cdef long[::1] qn_gid = pm.qn_gid
    cdef double[::1] qn_w = pm.qn_w
    for k in range(qg_brow.shape[0]):
        u = y[qg_brow[k]] + qg_cb[k]
        if u <= 0.0:
            return 0
        qg_u[k] = u
        qg_q[k] = 0.0
    for k in range(qn_row.shape[0]):
        v = y[qn_row[k]]
        qg_q[qn_gid[k]] += qn_w[k] * v * v
    for k in range(qg_brow.shape[0]):
        v = qg_q[k] / qg_u[k]
        tgt = qg_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    cdef long[::1] rb_arow = pm.rb_arow
    cdef long[::1] rb_brow = pm.rb_brow
    cdef long[::1] rb_tgt = pm.rb_tgt
    cdef double[::1] rb_ca = pm.rb_ca
    cdef double[::1] rb_cb = pm.rb_cb
    cdef double[::1] rb_c0 = pm.rb_c0
    for k in range(rb_arow.shape[0]):
        u = y[rb_arow[k]] + rb_ca[k]
        w = y[rb_brow[k]] + rb_cb[k]
        if u <= 0.0 or w <= 0.0:
            return 0
        rb_u[k] = u
        rb_v[k] = w
        v = rb_c0[k] / (u * w)
        tgt = rb_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    cdef long[::1] sq_row = pm.sq_row
    cdef long[::1] sq_tgt = pm.sq_tgt
    cdef double[::1] sq_c0 = pm.sq_c0
    cdef double[::1] sq_cu = pm.sq_cu
    for k in range(sq_row.shape[0]):
        u = y[sq_row[k]] + sq_cu[k]
        if u <= 0.0:
            return 0
        sq_u[k] = u
        v = sq_c0[k] * sqrt(u)
        tgt = sq_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    cdef long[::1] lg_row = pm.lg_row
    cdef long[::1] lg_tgt = pm.lg_tgt
    cdef double[::1] lg_c0 = pm.lg_c0
    cdef double[::1] lg_cu = pm.lg_cu
    for k in range(lg_row.shape[0]):
        u = y[lg_row[k]] + lg_cu[k]
        if u <= 0.0:
            return 0
        lg_u[k] = u
        v = lg_c0[k] * log(u)
        tgt = lg_tgt[k]
        if tgt < 0:
            F += v
        else:
            g[tgt] += v

    F_out[0] = F
    return 1


cdef class _Workspace:
    """Per-model scratch buffers, allocated once and reused across calls."""
    cdef public object g, ra_u, qg_u, qg_q, rb_u, rb_v, sq_u, lg_u
    cdef public object cg, d, cj, cp, cq, cc

    def __init__(self, pm):
        K = pm.L.shape[0]
        m = pm.m
        self.g = np.zeros(m)
        self.ra_u = np.zeros(max(1, pm.ra_row.size))
        self.qg_u = np.zeros(max(1, pm.qg_brow.size))
        self.qg_q = np.zeros(max(1, pm.qg_brow.size))
        self.rb_u = np.zeros(max(1, pm.rb_arow.size))
        self.rb_v = np.zeros(max(1, pm.rb_arow.size))
        self.sq_u = np.zeros(max(1, pm.sq_row.size))
        self.lg_u = np.zeros(max(1, pm.lg_row.size))
        self.cg = np.zeros(K)
        self.d = np.zeros(K)
        self.cj = np.zeros((m, K))
        ncross = pm.qn_row.size + pm.rb_arow.size
        self.cp = np.zeros(max(1, ncross), dtype=np.int64)
        self.cq = np.zeros(max(1, ncross), dtype=np.int64)
        self.cc = np.zeros(max(1, ncross))


def _workspace(pm):
    ws = getattr(pm, "_cy_ws", None)
    if ws is None:
        ws = _Workspace(pm)
        pm._cy_ws = ws
    return ws


def eval_values(pm, x):
    """Return (ok, F, g).  ok is False outside some atom's domain."""
    cdef cnp.ndarray y = np.dot(pm.L, x)
    ws = _workspace(pm)
    cdef cnp.ndarray g = ws.g
    cdef double F = 0.0
    cdef int ok = _values(pm, y, g, &F, ws.ra_u, ws.qg_u, ws.qg_q,
                          ws.rb_u, ws.rb_v, ws.sq_u, ws.lg_u)
    if not ok:
        return False, 0.0, np.zeros(pm.m)
    return True, F, g.copy()


def eval_barrier(pm, x, double t):
    """Return (ok, phi, F); ok is False outside domains or with any g_j >= 0."""
    cdef cnp.ndarray y = np.dot(pm.L, x)
    ws = _workspace(pm)
    cdef double[::1] g = ws.g
    cdef double F = 0.0
    cdef int ok = _values(pm, y, g, &F, ws.ra_u, ws.qg_u, ws.qg_q,
                          ws.rb_u, ws.rb_v, ws.sq_u, ws.lg_u)
    if not ok:
        return False, INFINITY, 0.0
    cdef double phi = -t * F
    cdef Py_ssize_t j
    for j in range(g.shape[0]):
        if g[j] >= 0.0:
            return False, INFINITY, 0.0
        phi -= log(-g[j])
    return True, phi, F


def eval_barrier_full(pm, x, double t):
    """Return (ok, phi, F, grad, hess) of the barrier at x."""
    cdef cnp.ndarray y_arr = np.dot(pm.L, x)
    cdef double[::1] y = y_arr
    ws = _workspace(pm)
    cdef double[::1] g = ws.g
    cdef double F = 0.0
    cdef int ok = _values(pm, y, g, &F, ws.ra_u, ws.qg_u, ws.qg_q,
                          ws.rb_u, ws.rb_v, ws.sq_u, ws.lg_u)
    if not ok:
        return False, INFINITY, 0.0, None, None

    cdef Py_ssize_t m = pm.m
    cdef Py_ssize_t j, k
    cdef double phi = -t * F
    cdef double[::1] s = np.empty(m)
    for j in range(m):
        if g[j] >= 0.0:
            return False, INFINITY, 0.0, None, None
        s[j] = 1.0 / (-g[j])
        phi -= log(-g[j])

    cdef cnp.ndarray cg_arr = ws.cg
    cdef cnp.ndarray d_arr = ws.d
    cdef cnp.ndarray cj_arr = ws.cj
    cg_arr[:] = 0.0
    d_arr[:] = 0.0
    cj_arr[:] = 0.0
    cdef double[::1] cg = cg_arr
    cdef double[::1] d = d_arr
    cdef double[:, ::1] cj = cj_arr
    cdef long[::1] cp = ws.cp
    cdef long[::1] cq = ws.cq
    cdef double[::1] cc = ws.cc
    cdef Py_ssize_t ncross = 0

    cdef long tgt
    cdef double fac, coef, u, v, w, q, kk, yv

    cdef long[::1] aff_row = pm.aff_row
    cdef long[::1] aff_tgt = pm.aff_tgt
    for k in range(aff_row.shape[0]):
        tgt = aff_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        cg[aff_row[k]] += fac
        if tgt >= 0:
            cj[tgt, aff_row[k]] += 1.0

    cdef long[::1] q_row = pm.q_row
    cdef long[::1] q_tgt = pm.q_tgt
    cdef double[::1] q_w = pm.q_w
    for k in range(q_row.shape[0]):
        tgt = q_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        yv = y[q_row[k]]
        coef = 2.0 * q_w[k] * yv
        cg[q_row[k]] += coef * fac
        d[q_row[k]] += 2.0 * q_w[k] * fac
        if tgt >= 0:
            cj[tgt, q_row[k]] += coef

    cdef long[::1] ra_row = pm.ra_row
    cdef long[::1] ra_tgt = pm.ra_tgt
    cdef double[::1] ra_c0 = pm.ra_c0
    cdef double[::1] ra_u = ws.ra_u
    for k in range(ra_row.shape[0]):
        tgt = ra_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        u = ra_u[k]
        coef = -ra_c0[k] / (u * u)
        cg[ra_row[k]] += coef * fac
        d[ra_row[k]] += 2.0 * ra_c0[k] / (u * u * u) * fac
        if tgt >= 0:
            cj[tgt, ra_row[k]] += coef

    cdef long[::1] qg_brow = pm.qg_brow
    cdef long[::1] qg_tgt = pm.qg_tgt
    cdef long[::1] qn_row = pm.qn_row
    cdef long[::1] qn_gid = pm.qn_gid
    cdef double[::1] qn_w = pm.qn_w
    cdef double[::1] qg_u = ws.qg_u
    cdef double[::1] qg_q = ws.qg_q
    cdef long gid
    for k in range(qn_row.shape[0]):
        gid = qn_gid[k]
        tgt = qg_tgt[gid]
        fac = -t if tgt < 0 else s[tgt]
        u = qg_u[gid]
        yv = y[qn_row[k]]
        coef = 2.0 * qn_w[k] * yv / u
        cg[qn_row[k]] += coef * fac
        d[qn_row[k]] += 2.0 * qn_w[k] / u * fac
        if tgt >= 0:
            cj[tgt, qn_row[k]] += coef
        cp[ncross] = qn_row[k]
        cq[ncross] = qg_brow[gid]
        cc[ncross] = -2.0 * qn_w[k] * yv / (u * u) * fac
        ncross += 1
    for k in range(qg_brow.shape[0]):
        tgt = qg_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        u = qg_u[k]
        q = qg_q[k]
        coef = -q / (u * u)
        cg[qg_brow[k]] += coef * fac
        d[qg_brow[k]] += 2.0 * q / (u * u * u) * fac
        if tgt >= 0:
            cj[tgt, qg_brow[k]] += coef

    cdef long[::1] rb_arow = pm.rb_arow
    cdef long[::1] rb_brow = pm.rb_brow
    cdef long[::1] rb_tgt = pm.rb_tgt
    cdef double[::1] rb_c0 = pm.rb_c0
    cdef double[::1] rb_u = ws.rb_u
    cdef double[::1] rb_v = ws.rb_v
    for k in range(rb_arow.shape[0]):
        tgt = rb_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        u = rb_u[k]
        v = rb_v[k]
        kk = rb_c0[k] / (u * v)
        coef = -kk / u
        cg[rb_arow[k]] += coef * fac
        if tgt >= 0:
            cj[tgt, rb_arow[k]] += coef
        coef = -kk / v
        cg[rb_brow[k]] += coef * fac
        if tgt >= 0:
            cj[tgt, rb_brow[k]] += coef
        d[rb_arow[k]] += 2.0 * kk / (u * u) * fac
        d[rb_brow[k]] += 2.0 * kk / (v * v) * fac
        cp[ncross] = rb_arow[k]
        cq[ncross] = rb_brow[k]
        cc[ncross] = kk / (u * v) * fac
        ncross += 1

    cdef long[::1] sq_row = pm.sq_row
    cdef long[::1] sq_tgt = pm.sq_tgt
    cdef double[::1] sq_c0 = pm.sq_c0
    cdef double[::1] sq_u = ws.sq_u
    for k in range(sq_row.shape[0]):
        tgt = sq_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        u = sq_u[k]
        v = sqrt(u)
        coef = 0.5 * sq_c0[k] / v
        cg[sq_row[k]] += coef * fac
        d[sq_row[k]] += -0.25 * sq_c0[k] / (u * v) * fac
        if tgt >= 0:
            cj[tgt, sq_row[k]] += coef

    cdef long[::1] lg_row = pm.lg_row
    cdef long[::1] lg_tgt = pm.lg_tgt
    cdef double[::1] lg_c0 = pm.lg_c0
    cdef double[::1] lg_u = ws.lg_u
    for k in range(lg_row.shape[0]):
        tgt = lg_tgt[k]
        fac = -t if tgt < 0 else s[tgt]
        u = lg_u[k]
        coef = lg_c0[k] / u
        cg[lg_row[k]] += coef * fac
        d[lg_row[k]] += -lg_c0[k] / (u * u) * fac
        if tgt >= 0:
            cj[tgt, lg_row[k]] += coef

    L = pm.L
    grad = L.T.dot(cg_arr)
    hess = (L.T * d_arr).dot(L)

    cdef double[:, ::1] H = hess
    cdef double[:, ::1] Lv = L
    cdef Py_ssize_t n = pm.n
    cdef Py_ssize_t a, b2
    cdef long p_, q_
    cdef double c_, lpa, lqa
    for k in range(ncross):
        p_ = cp[k]
        q_ = cq[k]
        c_ = cc[k]
        for a in range(n):
            lpa = c_ * Lv[p_, a]
            lqa = c_ * Lv[q_, a]
            for b2 in range(n):
                H[a, b2] += lpa * Lv[q_, b2] + lqa * Lv[p_, b2]

    if m:
        # cg already carries the 1/(-g_j) factors; G is only needed for the
        # barrier's outer-product curvature sum_j (grad g_j)(grad g_j)^T / g_j^2
        G = cj_arr.dot(L)
        s_arr = np.asarray(s)
        hess += (G * (s_arr * s_arr)[:, None]).T.dot(G)
    return True, phi, F, grad, hess
