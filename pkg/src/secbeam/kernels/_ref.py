"""Pure-numpy evaluation kernel (fallback when the extension is absent).

Implements the same three entry points as the compiled kernel:

* ``eval_values``:       objective and constraint values,
* ``eval_barrier``:      log-barrier value (line searches),
* ``eval_barrier_full``: barrier value, gradient and Hessian (Newton steps).

The barrier of a model ``maximize F(x) s.t. g_j(x) <= 0`` at weight ``t`` is
``phi = -t*F(x) - sum_j ln(-g_j(x))``.
"""

from __future__ import annotations

import numpy as np


def _kind_values(pm, y):
    """Per-kind atom values plus domain flags and cached intermediates."""
    ok = True
    cache = {}
    if pm.ra_row.size:
        u = y[pm.ra_row] + pm.ra_cu
        ok &= bool(np.all(u > 0.0))
        cache["ra_u"] = u
    if pm.qg_brow.size:
        u = y[pm.qg_brow] + pm.qg_cb
        ok &= bool(np.all(u > 0.0))
        qsum = np.zeros(pm.qg_brow.size)
        yn = y[pm.qn_row]
        np.add.at(qsum, pm.qn_gid, pm.qn_w * yn * yn)
        cache["qg_u"], cache["qg_q"], cache["qn_y"] = u, qsum, yn
    if pm.rb_arow.size:
        u = y[pm.rb_arow] + pm.rb_ca
        v = y[pm.rb_brow] + pm.rb_cb
        ok &= bool(np.all(u > 0.0) and np.all(v > 0.0))
        cache["rb_u"], cache["rb_v"] = u, v
    if pm.sq_row.size:
        u = y[pm.sq_row] + pm.sq_cu
        ok &= bool(np.all(u > 0.0))
        cache["sq_u"] = u
    if pm.lg_row.size:
        u = y[pm.lg_row] + pm.lg_cu
        ok &= bool(np.all(u > 0.0))
        cache["lg_u"] = u
    return ok, cache


def _accumulate(pm, y, cache):
    """Objective value F and constraint values g from cached intermediates."""
    F = pm.obj_const
    g = pm.con_const.copy()

    def acc(tgt, vals):
        nonlocal F
        isobj = tgt < 0
        if np.any(isobj):
            F += float(vals[isobj].sum())
        if np.any(~isobj):
            np.add.at(g, tgt[~isobj], vals[~isobj])

    if pm.aff_row.size:
        acc(pm.aff_tgt, y[pm.aff_row])
    if pm.q_row.size:
        yq = y[pm.q_row]
        acc(pm.q_tgt, pm.q_w * yq * yq)
    if pm.ra_row.size:
        acc(pm.ra_tgt, pm.ra_c0 / cache["ra_u"])
    if pm.qg_brow.size:
        acc(pm.qg_tgt, cache["qg_q"] / cache["qg_u"])
    if pm.rb_arow.size:
        acc(pm.rb_tgt, pm.rb_c0 / (cache["rb_u"] * cache["rb_v"]))
    if pm.sq_row.size:
        acc(pm.sq_tgt, pm.sq_c0 * np.sqrt(cache["sq_u"]))
    if pm.lg_row.size:
        acc(pm.lg_tgt, pm.lg_c0 * np.log(cache["lg_u"]))
    return F, g


def eval_values(pm, x):
    """Return (ok, F, g).  ok is False outside some atom's domain."""
    y = pm.L @ x
    ok, cache = _kind_values(pm, y)
    if not ok:
        return False, 0.0, np.zeros(pm.m)
    F, g = _accumulate(pm, y, cache)
    return True, F, g


def eval_barrier(pm, x, t):
    """Return (ok, phi, F); ok is False outside domains or with any g_j >= 0."""
    ok, F, g = eval_values(pm, x)
    if not ok or (pm.m and g.max() >= 0.0):
        return False, np.inf, 0.0
    phi = -t * F - float(np.sum(np.log(-g))) if pm.m else -t * F
    return True, phi, F


def _factor(tgt, t, s):
    """Barrier chain factor per atom: -t on the objective, 1/(-g_j) on constraints."""
    f = np.where(tgt < 0, -t, 0.0)
    con = tgt >= 0
    if np.any(con):
        f[con] = s[tgt[con]]
    return f


def eval_barrier_full(pm, x, t):
    """Return (ok, phi, F, grad, hess) of the barrier at x."""
    y = pm.L @ x
    ok, cache = _kind_values(pm, y)
    if not ok:
        return False, np.inf, 0.0, None, None
    F, g = _accumulate(pm, y, cache)
    if pm.m and g.max() >= 0.0:
        return False, np.inf, 0.0, None, None
    s = 1.0 / (-g) if pm.m else np.zeros(0)
    phi = -t * F - float(np.sum(np.log(-g))) if pm.m else -t * F

    K = pm.L.shape[0]
    cg = np.zeros(K)            # factored gradient coefficient per row
    cj = np.zeros((pm.m, K))    # unfactored per-constraint coefficients
    d = np.zeros(K)             # factored Hessian diagonal (in row space)
    cross_p, cross_q, cross_c = [], [], []

    def put(rows, tgt, coef, fac):
        np.add.at(cg, rows, coef * fac)
        con = tgt >= 0
        if np.any(con):
            np.add.at(cj, (tgt[con], rows[con]), coef[con])

    if pm.aff_row.size:
        fac = _factor(pm.aff_tgt, t, s)
        put(pm.aff_row, pm.aff_tgt, np.ones(pm.aff_row.size), fac)
    if pm.q_row.size:
        fac = _factor(pm.q_tgt, t, s)
        yq = y[pm.q_row]
        put(pm.q_row, pm.q_tgt, 2.0 * pm.q_w * yq, fac)
        np.add.at(d, pm.q_row, 2.0 * pm.q_w * fac)
    if pm.ra_row.size:
        fac = _factor(pm.ra_tgt, t, s)
        u = cache["ra_u"]
        put(pm.ra_row, pm.ra_tgt, -pm.ra_c0 / u**2, fac)
        np.add.at(d, pm.ra_row, 2.0 * pm.ra_c0 / u**3 * fac)
    if pm.qg_brow.size:
        facg = _factor(pm.qg_tgt, t, s)
        u, q = cache["qg_u"], cache["qg_q"]
        yn = cache["qn_y"]
        ug, qg_, facn = u[pm.qn_gid], q[pm.qn_gid], facg[pm.qn_gid]
        tgtn = pm.qg_tgt[pm.qn_gid]
        put(pm.qn_row, tgtn, 2.0 * pm.qn_w * yn / ug, facn)
        put(pm.qg_brow, pm.qg_tgt, -q / u**2, facg)
        np.add.at(d, pm.qn_row, 2.0 * pm.qn_w / ug * facn)
        np.add.at(d, pm.qg_brow, 2.0 * q / u**3 * facg)
        cross_p.append(pm.qn_row)
        cross_q.append(pm.qg_brow[pm.qn_gid])
        cross_c.append(-2.0 * pm.qn_w * yn / ug**2 * facn)
    if pm.rb_arow.size:
        fac = _factor(pm.rb_tgt, t, s)
        u, v = cache["rb_u"], cache["rb_v"]
        k = pm.rb_c0 / (u * v)
        put(pm.rb_arow, pm.rb_tgt, -k / u, fac)
        put(pm.rb_brow, pm.rb_tgt, -k / v, fac)
        np.add.at(d, pm.rb_arow, 2.0 * k / u**2 * fac)
        np.add.at(d, pm.rb_brow, 2.0 * k / v**2 * fac)
        cross_p.append(pm.rb_arow)
        cross_q.append(pm.rb_brow)
        cross_c.append(k / (u * v) * fac)
    if pm.sq_row.size:
        fac = _factor(pm.sq_tgt, t, s)
        u = cache["sq_u"]
        su = np.sqrt(u)
        put(pm.sq_row, pm.sq_tgt, 0.5 * pm.sq_c0 / su, fac)
        np.add.at(d, pm.sq_row, -0.25 * pm.sq_c0 / (u * su) * fac)
    if pm.lg_row.size:
        fac = _factor(pm.lg_tgt, t, s)
        u = cache["lg_u"]
        put(pm.lg_row, pm.lg_tgt, pm.lg_c0 / u, fac)
        np.add.at(d, pm.lg_row, -pm.lg_c0 / u**2 * fac)

    grad = pm.L.T @ cg
    hess = (pm.L.T * d) @ pm.L
    if cross_p:
        p = np.concatenate(cross_p)
        q_ = np.concatenate(cross_q)
        c = np.concatenate(cross_c)
        Hc = np.einsum("k,ki,kj->ij", c, pm.L[p], pm.L[q_])
        hess += Hc + Hc.T
    if pm.m:
        # cg already carries the 1/(-g_j) factors; G is only needed for the
        # barrier's outer-product curvature sum_j (grad g_j)(grad g_j)^T / g_j^2
        G = cj @ pm.L
        hess += (G * (s**2)[:, None]).T @ G
    return True, phi, F, grad, hess
