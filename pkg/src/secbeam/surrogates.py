"""Concave lower bounds, convex upper bounds and trust regions at an iterate.

At each path-following step the exact rate functions are replaced by bounds
that are (i) tight at the expansion point, (ii) first-order tight there, and
(iii) globally valid over an accompanying trust region.  All builders emit
:class:`~secbeam.atoms.Expr` objects ready for the inner solver; the scalar
inequalities they rest on are exposed directly for verification
(:func:`lb_log_inv_product`, :func:`ub_log_ratio`, :func:`lb_ratio_sqrt`).

Inequality directions (everywhere ``<=`` constraints are "expr <= 0"):

* user rate:        f(w)  >= f_lb(w)      on the signal trust region,
* wiretap rate:     g(w)  <= g_ub(w)      on the interference trust region,
* outage equation:  g_io(w, r) >= g_io_lb(w, r) on the norm trust regions,
* signal margin:    phi(w, R) >= varphi_lb(w, R) everywhere (R > 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atoms import (
    Affine,
    Expr,
    LogAffine,
    QuadOverAffine,
    RecipAffine,
    RecipBilinear,
    SquaredForms,
    SqrtAffine,
)
from .errors import DegenerateExpansion, DomainError, GuardViolation, NonpositiveRate
from .model import beam_norms_sq, min_norm_sq
from .rates import outage_threshold_offset, sinr_margin

#: default relative scale of the strict-inequality margins eta
ETA_SCALE = 1e-6


def lb_log_inv_product(x, y, xb, yb):
    """Concave minorant of ln(1 + 1/(x*y)) linearized at (xb, yb).

    ln(1+1/(xb*yb)) + (1/(xb*yb))/(1+1/(xb*yb)) * (2 - x/xb - y/yb)
    <= ln(1+1/(x*y)), with equality at (xb, yb).
    """
    if min(x, y, xb, yb) <= 0:
        raise DomainError("lb_log_inv_product needs positive arguments")
    z = 1.0 / (xb * yb)
    return math.log1p(z) + z / (1.0 + z) * (2.0 - x / xb - y / yb)


def ub_log_ratio(x, y, xb, yb):
    """Convex majorant of ln(1 + x/y) linearized in the ratio at (xb, yb).

    ln(1+xb/yb) + (x/y - xb/yb)/(1+xb/yb) >= ln(1+x/y), tight at (xb, yb).
    """
    if min(y, xb, yb) <= 0 or x < 0:
        raise DomainError("ub_log_ratio needs positive denominators")
    zb = xb / yb
    return math.log1p(zb) + (x / y - zb) / (1.0 + zb)


def lb_ratio_sqrt(r, w_sq, rb, wb_sq):
    """Concave minorant of r / ||w||^2 from the convexity of x^2/t.

    2*(sqrt(rb)/wb_sq)*sqrt(r) - (rb/wb_sq^2)*w_sq <= r/w_sq, tight at
    (rb, wb_sq).  Arguments are the scalar r values and squared norms.
    """
    if min(r, w_sq, rb, wb_sq) <= 0:
        raise DomainError("lb_ratio_sqrt needs positive arguments")
    return 2.0 * math.sqrt(rb) / wb_sq * math.sqrt(r) - rb / wb_sq**2 * w_sq


@dataclass(frozen=True)
class ExpansionState:
    """An iterate together with the constants every bound is built from."""

    W: np.ndarray
    r: np.ndarray | None
    R: np.ndarray | None
    norms: np.ndarray           # ||w_i||^2
    sig_gain: np.ndarray        # |h_ii^H w_i|^2
    denom_user: np.ndarray      # sum_{j != i} |h_ji^H w_j|^2 + sigma_i^2
    sinr_user: np.ndarray       # per-user SINR at the iterate
    eve_gain: np.ndarray | None     # |h_je^H w_j|^2 (perfect CSI)
    denom_eve: np.ndarray | None    # sum_{j != i} |h_je^H w_j|^2 + sigma_e^2
    sinr_eve: np.ndarray | None
    x_pair: np.ndarray | None   # x_ij = r_i hv_j ||w_j||^2 / (hv_i ||w_i||^2)
    y_pair: np.ndarray | None   # x_ij / (1 + x_ij)
    phi: np.ndarray | None      # signal margins phi_i(W, R_i)
    x_ratio: np.ndarray | None  # phi_i / ||w_min||^2
    i_min: int

    @classmethod
    def at(cls, W, ch, scenario, r=None, R=None):
        M = scenario.M
        W = np.asarray(W)
        norms = beam_norms_sq(W)
        h = ch.known_direct
        sig = np.empty(M)
        den = np.empty(M)
        for i in range(M):
            sig[i] = abs(np.vdot(h[i, i], W[i])) ** 2
            den[i] = sum(abs(np.vdot(h[j, i], W[j])) ** 2
                         for j in range(M) if j != i) + scenario.sigma_u[i]
        eve_gain = denom_eve = sinr_eve = None
        if ch.h_eve_vec is not None:
            eve_gain = np.array([abs(np.vdot(ch.h_eve_vec[j], W[j])) ** 2
                                 for j in range(M)])
            denom_eve = eve_gain.sum() - eve_gain + scenario.sigma_e
            sinr_eve = eve_gain / denom_eve
        x_pair = y_pair = None
        if r is not None:
            r = np.asarray(r, dtype=float)
            if ch.h_eve_var is None:
                raise ValueError("pairwise expansion constants need wiretap variances")
            hv = ch.h_eve_var
            x_pair = np.zeros((M, M))
            for i in range(M):
                for j in range(M):
                    if j != i:
                        x_pair[i, j] = r[i] * hv[j] * norms[j] / (hv[i] * norms[i])
            y_pair = x_pair / (1.0 + x_pair)
        phi = x_ratio = None
        _, i_min = min_norm_sq(W)
        if R is not None:
            R = np.asarray(R, dtype=float)
            phi = np.array([sinr_margin(W, ch, scenario, i, R[i]) for i in range(M)])
            x_ratio = phi / norms[i_min]
        return cls(W=W, r=r, R=R, norms=norms, sig_gain=sig, denom_user=den,
                   sinr_user=sig / den, eve_gain=eve_gain, denom_eve=denom_eve,
                   sinr_eve=sinr_eve, x_pair=x_pair, y_pair=y_pair,
                   phi=phi, x_ratio=x_ratio, i_min=i_min)


def _trust_leq(a, lhs_at_expansion, eta):
    """Constraint 'a @ x - const >= eta' in <=0 form, tight value known."""
    return Expr((Affine(-a, lhs_at_expansion + eta),))


def build_f_lb(state, ch, scenario, lay, i, eta_scale=ETA_SCALE):
    """Concave lower bound of the user rate f_i and its trust constraint.

    Returns ``(expr, trust)`` where ``trust <= 0`` keeps the linearized
    signal gain positive.
    """
    h = ch.known_direct
    A = float(state.sig_gain[i])
    # numerically-zero gains (relative to the Cauchy-Schwarz scale) leave no
    # usable trust region around the expansion point
    gain_scale = float(np.real(np.vdot(h[i, i], h[i, i]))) * float(state.norms[i])
    if A <= 1e-14 * max(1.0, gain_scale):
        raise DegenerateExpansion(f"zero signal gain for user {i} at expansion point")
    D = float(state.denom_user[i])
    xk = A / D
    tc = xk / (1.0 + xk)
    a_u = lay.linearized_gain(h[i, i], state.W[i], i)
    atoms = [RecipAffine(-tc * A, a_u, -A)]
    if scenario.M > 1:
        rows = np.vstack([lay.gain_rows(h[j, i], j)
                          for j in range(scenario.M) if j != i])
        atoms.append(SquaredForms(rows, -tc / D))
    const = math.log1p(xk) + 2.0 * tc - tc * scenario.sigma_u[i] / D
    trust = _trust_leq(a_u, -A, eta_scale * A)
    return Expr(tuple(atoms), const), trust


def build_g_ub(state, ch, scenario, lay, i, eta_scale=ETA_SCALE):
    """Convex upper bound of the instantaneous wiretap rate g_i.

    Returns ``(expr, trust)``; ``trust`` is None for M = 1 (no interfering
    links to keep positive) and when the expansion-point wiretap
    interference is negligible, in which case the affine denominator stays
    pinned at sigma_e^2.
    """
    he = ch.h_eve_vec
    if he is None:
        raise ValueError("instantaneous wiretap bound needs eavesdropper vectors")
    M = scenario.M
    E = state.eve_gain
    interf = float(state.denom_eve[i] - scenario.sigma_e)
    xe = float(state.sinr_eve[i])
    s1 = 1.0 / (1.0 + xe)
    num_rows = lay.gain_rows(he[i], i)
    if M > 1 and interf > 1e-12 * scenario.sigma_e:
        b = np.zeros(lay.n)
        for j in range(M):
            if j != i:
                b += lay.linearized_gain(he[j], state.W[j], j)
        cb = scenario.sigma_e - interf
        trust = _trust_leq(b, -interf, eta_scale * interf)
    else:
        b = np.zeros(lay.n)
        cb = scenario.sigma_e
        trust = None
    expr = Expr((QuadOverAffine(num_rows, s1, b, cb),),
                math.log1p(xe) - s1 * xe)
    return expr, trust


def build_a_ub(state, lay, i):
    """Tangent-line upper bound of ln(1 + r_i) at the expansion value."""
    rk = float(state.r[i])
    if rk < 0:
        raise DomainError("expansion outage SINR must be nonnegative")
    a = lay.unit(lay.r_index(i)) / (1.0 + rk)
    return Expr((Affine(a),), math.log1p(rk) - rk / (1.0 + rk))


def build_w_trust(state, lay, j, eta_scale=ETA_SCALE):
    """Norm trust region 2 Re{(w_j^k)^H w_j} - ||w_j^k||^2 >= eta, in <=0 form."""
    nj = float(state.norms[j])
    if nj <= 0.0:
        raise DegenerateExpansion(f"zero-power beamformer {j} at expansion point")
    a = lay.inner_row(state.W[j], j)
    return _trust_leq(a, -nj, eta_scale * nj)


def build_lambda_lb(state, ch, scenario, lay, i, j):
    """Concave lower bound of ln(1 + r_i hv_j ||w_j||^2 / (hv_i ||w_i||^2)).

    Valid over the norm trust region of ``w_j`` (:func:`build_w_trust`);
    tight and gradient-tight at the expansion point.
    """
    if state.r is None:
        raise DegenerateExpansion("pairwise wiretap bound needs expansion SINRs r")
    rk = float(state.r[i])
    ni, nj = float(state.norms[i]), float(state.norms[j])
    if rk <= 0.0 or ni <= 0.0 or nj <= 0.0:
        raise DegenerateExpansion("pairwise wiretap bound needs positive r and norms")
    x = float(state.x_pair[i, j])
    y = float(state.y_pair[i, j])
    a_r = lay.unit(lay.r_index(i))
    b_w = lay.inner_row(state.W[j], j)
    atoms = (
        RecipBilinear(-y * rk * nj, a_r, 0.0, b_w, -nj),
        SquaredForms(lay.norm_rows(i), -y / ni),
    )
    return Expr(atoms, math.log1p(x) + 2.0 * y)


def build_g_io_lb(state, ch, scenario, lay, i):
    """Concave lower bound of the eavesdropper outage equation g_io(w, r_i)."""
    hv = ch.h_eve_var
    if hv is None:
        raise ValueError("outage-equation bound needs wiretap variances")
    rk = float(state.r[i])
    ni = float(state.norms[i])
    if rk <= 0.0 or ni <= 0.0:
        raise DegenerateExpansion("outage-equation bound needs r_i > 0 and power > 0")
    se = scenario.sigma_e
    atoms = [
        SqrtAffine(2.0 * se * math.sqrt(rk) / ni, lay.unit(lay.r_index(i)), 0.0),
        SquaredForms(lay.norm_rows(i), -se * rk / ni**2),
    ]
    expr = Expr(tuple(atoms), hv[i] * math.log1p(-scenario.eps_ev))
    for j in range(scenario.M):
        if j != i:
            expr = expr + build_lambda_lb(state, ch, scenario, lay, i, j).scaled(hv[i])
    return expr


def build_ell_lb(state, ch, lay, i):
    """Affine minorant of |h_ii^H w_i|^2 / R_i at (w_i^k, R_i^k)."""
    if state.R is None:
        raise NonpositiveRate("linearized signal-over-rate needs expansion rates R")
    Rk = float(state.R[i])
    if Rk <= 0.0:
        raise NonpositiveRate("expansion rate R_i must be positive")
    h = ch.known_direct
    A = float(state.sig_gain[i])
    a = lay.linearized_gain(h[i, i], state.W[i], i) / Rk
    a -= (A / Rk**2) * lay.unit(lay.R_index(i))
    return Expr((Affine(a),))


def build_varphi_lb(state, ch, scenario, lay, i):
    """Concave lower bound of the signal margin phi_i(w, R_i)."""
    expr = build_ell_lb(state, ch, lay, i)
    if scenario.M > 1:
        h = ch.known_direct
        rows = np.vstack([lay.gain_rows(h[j, i], j)
                          for j in range(scenario.M) if j != i])
        expr = expr + Expr((SquaredForms(rows, -1.0 / (1.0 - scenario.delta)),))
    return expr - scenario.sigma_u[i]


def build_robust_constraints(state, ch, scenario, lay, eta_scale=ETA_SCALE):
    """Inner approximations of the uncertain-channel rate constraints.

    Per user: the positive-margin constraint ``varphi_lb >= eta`` and the
    certified-rate threshold constraint

        delta*[ (M-1)/2 * (ln x_i - 1) + delta_M ] * ||w_imin||^2
            <= (1 - delta*(M-1)/(2 x_i)) * varphi_lb(w, R_i),

    both in <=0 form.  Raises GuardViolation when one of the coefficient
    sign guards fails instead of silently clamping.
    """
    if state.phi is None or state.x_ratio is None:
        raise DegenerateExpansion("robust constraints need expansion rates R")
    M, d = scenario.M, scenario.delta
    dM = outage_threshold_offset(M, scenario.eps_user, d)
    cons = []
    for i in range(M):
        phi_k = float(state.phi[i])
        x_i = float(state.x_ratio[i])
        if phi_k <= 0.0 or x_i <= 0.0:
            raise DegenerateExpansion(f"nonpositive signal margin for user {i}")
        k1 = 0.5 * (M - 1) * (math.log(x_i) - 1.0) + dM
        k2 = 1.0 - d * 0.5 * (M - 1) / x_i
        if k1 < 0.0 or k2 < 0.0:
            raise GuardViolation(
                f"threshold-constraint guards failed for user {i}",
                k1=k1, k2=k2, x_ratio=x_i, delta=d, delta_M=dM)
        varphi = build_varphi_lb(state, ch, scenario, lay, i)
        cons.append(-varphi + eta_scale * phi_k)
        cons.append(
            Expr((SquaredForms(lay.norm_rows(state.i_min), d * k1),))
            + varphi.scaled(-k2))
    return cons


def build_rate_term(lay, i):
    """ln(1 + R_i), concave as-is (no approximation required)."""
    return Expr((LogAffine(1.0, lay.unit(lay.R_index(i)), 1.0),))


def build_power_constraint(lay, scenario, i):
    """||w_i||^2 - P_i <= 0."""
    return Expr((SquaredForms(lay.norm_rows(i), 1.0),), -float(scenario.P[i]))
