"""Exact rate, secrecy and outage-rate functions.

These are the objective evaluators used for reporting, monotonicity checks
and root-finding targets.  Everything here is expressed in nats/s/Hz and is
free of surrogate approximations; the path-following layer is built on top.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NonpositiveRate, ZeroBeamformer
from .model import Regime, beam_norms_sq, min_norm_sq
from .rootfind import Bracket, bisect_lower, bisect_upper, expand_bracket_integer


def _direct(ch):
    h = ch.known_direct
    if h is None:
        raise ValueError("channel set has no user channels")
    return h


def user_sinr(W, ch, scenario, i):
    """SINR of user i: |h_ii^H w_i|^2 / (sum_{j!=i} |h_ji^H w_j|^2 + sigma_i^2)."""
    h = _direct(ch)
    sig = abs(np.vdot(h[i, i], W[i])) ** 2
    interf = sum(abs(np.vdot(h[j, i], W[j])) ** 2 for j in range(scenario.M) if j != i)
    return sig / (interf + scenario.sigma_u[i])


def user_rate(W, ch, scenario, i):
    """Instantaneous throughput of user i, ln(1 + SINR_i), in nats."""
    return math.log1p(user_sinr(W, ch, scenario, i))


def eve_sinr_instant(W, ch, scenario, i):
    """Wiretap SINR for user i's signal at the eavesdropper (perfect CSI)."""
    if ch.h_eve_vec is None:
        raise ValueError("instantaneous wiretap rate needs eavesdropper vectors")
    he = ch.h_eve_vec
    sig = abs(np.vdot(he[i], W[i])) ** 2
    interf = sum(abs(np.vdot(he[j], W[j])) ** 2 for j in range(scenario.M) if j != i)
    return sig / (interf + scenario.sigma_e)


def eve_rate_instant(W, ch, scenario, i):
    """Instantaneous wiretapped throughput ln(1 + wiretap SINR) in nats."""
    return math.log1p(eve_sinr_instant(W, ch, scenario, i))


def eve_outage_gap(W, ch, scenario, i, r):
    """Closed-form outage equation of the statistical eavesdropper model.

    g(w, r) = hv_i ln(1-eps_ev) + sigma_e^2 r / ||w_i||^2
              + hv_i sum_{j!=i} ln(1 + r hv_j ||w_j||^2 / (hv_i ||w_i||^2)),

    with hv the wiretap variance scalars.  The root in r is exactly the
    eps_ev-outage wiretap SINR; the function is strictly increasing in r and
    negative at r = 0.
    """
    norms = beam_norms_sq(W)
    ni = float(norms[i])
    if ni <= 0.0:
        raise ZeroBeamformer(f"transmitter {i} has zero power")
    hv = ch.h_eve_var
    val = hv[i] * math.log1p(-scenario.eps_ev) + scenario.sigma_e * r / ni
    for j in range(scenario.M):
        if j != i:
            val += hv[i] * math.log1p(r * hv[j] * norms[j] / (hv[i] * ni))
    return float(val)


def eve_outage_sinr(W, ch, scenario, i, eps_b=1e-9, r_hint=None):
    """eps_ev-outage wiretap SINR: the root r of :func:`eve_outage_gap`.

    Returned with the one-sided rule ``0 <= gap(r) <= eps_b``.  ``r_hint``
    seeds the upper bracket endpoint (for example the subproblem's relaxed
    value); without a hint, the single-pair closed form is used, which is an
    upper bracket because the cross terms only add positive mass.
    """
    def gap(r):
        return eve_outage_gap(W, ch, scenario, i, r)

    ni = float(beam_norms_sq(W)[i])
    if ni <= 0.0:
        raise ZeroBeamformer(f"transmitter {i} has zero power")
    if r_hint is not None and r_hint > 0:
        hi = float(r_hint)
    else:
        hi = -ch.h_eve_var[i] * math.log1p(-scenario.eps_ev) * ni / scenario.sigma_e
    v_hi = gap(hi)
    if v_hi < 0.0:
        br = expand_bracket_integer(gap, hi)
    else:
        br = Bracket(0.0, hi, gap(0.0), v_hi)
    return bisect_upper(gap, br, eps_b)


def _margin_parts(W, ch, scenario, i):
    """Numerator and deterministic denominator of the signal margin."""
    h = _direct(ch)
    sig = abs(np.vdot(h[i, i], W[i])) ** 2
    interf = sum(abs(np.vdot(h[j, i], W[j])) ** 2 for j in range(scenario.M) if j != i)
    return sig, interf / (1.0 - scenario.delta) + scenario.sigma_u[i]


def sinr_margin(W, ch, scenario, i, R):
    """phi_i(w, R): signal-over-rate minus the inflated interference-plus-noise.

    phi = |h_ii^H w_i|^2 / R - [(1-delta)^{-1} sum_{j!=i} |h_ji^H w_j|^2
                                + sigma_i^2].
    Positive phi is the admissibility condition of the outage threshold
    machinery; the value itself may be negative.
    """
    if R <= 0:
        raise NonpositiveRate("sinr_margin needs R > 0")
    a, b = _margin_parts(W, ch, scenario, i)
    return a / R - b


def outage_threshold_offset(M, eps, delta):
    """The constant delta_M of the certified-rate threshold:

    ln(1/eps) + ln M - (1/M) sum_{i=1..M} ln Gamma(i) + (M-1)/2 ln(1/delta).
    """
    if not 0 < eps < 1 or delta <= 0 or M < 1:
        raise ValueError("need eps in (0,1), delta > 0, M >= 1")
    mean_lgamma = sum(math.lgamma(i) for i in range(1, M + 1)) / M
    return math.log(1.0 / eps) + math.log(M) - mean_lgamma \
        + 0.5 * (M - 1) * math.log(1.0 / delta)


def user_outage_gap(W, ch, scenario, i, R):
    """Threshold function zeta_i(R) whose root certifies the outage rate.

    zeta = -phi + delta*(M-1)/2 * s * ln(phi / s) + delta * delta_M * s

    with ``s`` the smallest squared beamformer norm and ``phi`` the margin
    of :func:`sinr_margin`.  Only defined where phi > 0 (DomainError
    otherwise).  With delta == 0 the expression degenerates to -phi.
    """
    phi = sinr_margin(W, ch, scenario, i, R)
    if scenario.delta == 0.0:
        return -phi
    if phi <= 0.0:
        raise DomainError("user_outage_gap needs phi > 0")
    s, _ = min_norm_sq(W)
    dM = outage_threshold_offset(scenario.M, scenario.eps_user, scenario.delta)
    return -phi + scenario.delta * 0.5 * (scenario.M - 1) * s * math.log(phi / s) \
        + scenario.delta * dM * s


def user_outage_sinr(W, ch, scenario, i, eps_b=1e-9, R_hint=None):
    """Certified eps-outage SINR of user i under channel uncertainty.

    Solves zeta_i(R) = 0 with the one-sided rule ``-eps_b <= zeta <= 0``.
    The bracket is grown around ``R_hint`` with the integer expansion
    procedure.  zeta is not globally monotone: it increases up to the rate
    where phi equals delta * ||w_min||^2 * (M-1)/2 and falls back to -inf at
    the domain edge.  Its peak value is always positive, so the certified
    crossing lies on the increasing branch; rates at or beyond the peak
    (and out-of-domain points) therefore count as positive during
    bracketing, which pins the search to that branch.  Without a hint the
    nominal SINR is used as seed.
    """
    a, b = _margin_parts(W, ch, scenario, i)
    s, _ = min_norm_sq(W)
    phi_peak = scenario.delta * s * 0.5 * (scenario.M - 1)
    R_peak = a / (b + phi_peak)

    def gap(R):
        if R >= R_peak:
            return math.inf
        try:
            return user_outage_gap(W, ch, scenario, i, R)
        except DomainError:
            return math.inf

    if R_hint is None or R_hint <= 0:
        R_hint = user_sinr(W, ch, scenario, i)
    br = expand_bracket_integer(gap, float(R_hint))
    return bisect_lower(gap, br, eps_b)


def secrecy_rates(W, ch, scenario, r=None, R=None):
    """Per-user secrecy throughputs in nats for the scenario's regime.

    Perfect CSI uses the instantaneous wiretap rate; the eavesdropper-outage
    regime needs the outage SINRs ``r``; the user-outage regime additionally
    needs the certified user SINRs ``R``.
    """
    M = scenario.M
    if scenario.regime is Regime.PERFECT_CSI:
        return np.array([user_rate(W, ch, scenario, i)
                         - eve_rate_instant(W, ch, scenario, i) for i in range(M)])
    if r is None:
        raise ValueError("outage regimes need the eavesdropper outage SINRs r")
    ev = np.log1p(np.asarray(r, dtype=float))
    if scenario.regime is Regime.EV_OUTAGE:
        f = np.array([user_rate(W, ch, scenario, i) for i in range(M)])
        return f - ev
    if R is None:
        raise ValueError("the user-outage regime needs the certified SINRs R")
    return np.log1p(np.asarray(R, dtype=float)) - ev


def secrecy_maximin(W, ch, scenario, r=None, R=None):
    """Worst-user secrecy throughput, min_i s_i, in nats."""
    return float(secrecy_rates(W, ch, scenario, r=r, R=R).min())


def see_ratio(W, ch, scenario, r=None, R=None):
    """Secure energy efficiency: sum of secrecy throughputs over total power.

    In nats per mW; the reporting layer converts to bits by dividing by ln 2.
    """
    from .model import total_power

    return float(secrecy_rates(W, ch, scenario, r=r, R=R).sum()) / total_power(W, scenario)


def mc_eve_outage(W, ch, scenario, r, n_samples, seed):
    """Monte-Carlo wiretap outage probabilities Prob(wiretap SINR_i < r_i).

    Samples the eavesdropper channel vectors ``sqrt(hv_j) * chi_j`` with
    ``chi_j ~ CN(0, I)`` and evaluates the SINR directly, independently of
    the closed-form outage equation.  Returns (estimates, std_errors).
    """
    M, Nt = scenario.M, scenario.Nt
    rng = np.random.default_rng(seed)
    re = rng.standard_normal((n_samples, M, Nt))
    im = rng.standard_normal((n_samples, M, Nt))
    chi = (re + 1j * im) / np.sqrt(2.0)
    # |chi_j^H w_j|^2 for every sample and transmitter
    g = np.abs(np.einsum("smk,mk->sm", chi.conj(), W)) ** 2 * ch.h_eve_var[None, :]
    tot = g.sum(axis=1)
    r = np.asarray(r, dtype=float)
    est = np.empty(M)
    for i in range(M):
        sinr = g[:, i] / (tot - g[:, i] + scenario.sigma_e)
        est[i] = np.count_nonzero(sinr < r[i]) / n_samples
    se = np.sqrt(np.maximum(est * (1 - est), 1.0 / n_samples) / n_samples)
    return est, se


def mc_user_outage(W, ch, scenario, R, n_samples, seed):
    """Monte-Carlo user outage under perturbed channels h = h_nominal + delta*chi.

    The sampled event matches the uncertain-channel rate definition: the
    numerator keeps the nominal gain while the direct-channel error enters
    the denominator as self-interference,

        Prob( |hb_ii^H w_i|^2 / (delta |chi_ii^H w_i|^2
              + sum_{j!=i} |(hb_ji + delta chi_ji)^H w_j|^2 + sigma_i^2) < R_i ).
    """
    M, Nt = scenario.M, scenario.Nt
    h = _direct(ch)
    rng = np.random.default_rng(seed)
    R = np.asarray(R, dtype=float)
    est = np.empty(M)
    d = scenario.delta
    for i in range(M):
        re = rng.standard_normal((n_samples, M, Nt))
        im = rng.standard_normal((n_samples, M, Nt))
        chi = (re + 1j * im) / np.sqrt(2.0)
        num = abs(np.vdot(h[i, i], W[i])) ** 2
        den = np.full(n_samples, scenario.sigma_u[i])
        den += d * np.abs(np.einsum("sk,k->s", chi[:, i, :].conj(), W[i])) ** 2
        for j in range(M):
            if j == i:
                continue
            hj = h[j, i][None, :] + d * chi[:, j, :]
            den += np.abs(np.einsum("sk,k->s", hj.conj(), W[j])) ** 2
        est[i] = np.count_nonzero(num / den < R[i]) / n_samples
    se = np.sqrt(np.maximum(est * (1 - est), 1.0 / n_samples) / n_samples)
    return est, se
