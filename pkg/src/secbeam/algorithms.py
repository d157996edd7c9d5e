"""Outer path-following loops for secrecy maximin and SEE maximization.

Six loops, two per channel-knowledge regime: worst-user secrecy throughput
maximization and secure-energy-efficiency maximization with QoS thresholds.
Each iteration builds the bound surrogates at the current iterate, solves
one convex subproblem through :mod:`secbeam.solver`, re-tightens the outage
SINRs by root-finding, and accepts the new point only if the true (exact)
objective improved, which makes the reported trace nondecreasing by
construction.  The SEE loops run the matching maximin loop first until every
QoS threshold holds, then iterate with the power-scaled objective shift.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from . import rates
from .atoms import Expr, Layout, SquaredForms, affine_expr
from .errors import (
    DegenerateExpansion,
    DomainError,
    GuardViolation,
    InfeasibleStart,
    NoBracket,
    NoSignChange,
    NonpositiveRate,
    ZeroBeamformer,
)
from .model import Regime, beam_norms_sq
from .solver import SolveStatus, SubproblemModel, solve
from .surrogates import (
    ExpansionState,
    build_a_ub,
    build_f_lb,
    build_g_io_lb,
    build_g_ub,
    build_power_constraint,
    build_rate_term,
    build_robust_constraints,
    build_varphi_lb,
    build_w_trust,
)

_RECOVERABLE = (InfeasibleStart, DegenerateExpansion, GuardViolation, NoBracket,
                NoSignChange, DomainError, NonpositiveRate, ZeroBeamformer)

#: absolute floor for the positive-rate variables r_i (and R_i)
_RATE_FLOOR = 1e-12


class RunStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    SOLVER_FALLBACK = "solver_fallback"
    INFEASIBLE = "infeasible"
    QOS_MET = "qos_met"  # internal: initialization phase reached all thresholds


@dataclass
class AlgorithmConfig:
    """Tolerances of the outer loops and the inner solver."""

    eps_tol: float = 1e-4          # relative objective increment stopping rule
    max_outer_iter: int = 200
    feas_tol: float = 1e-8
    opt_tol: float = 1e-6
    eps_b: float = 1e-9            # one-sided root tolerance
    eta_scale: float = 1e-6        # trust-region margin, relative
    qos_margin: float = 1e-7       # strictness margin for QoS initialization
    debug_checks: bool = False     # verify surrogate tightness at each iterate


@dataclass
class ConvergenceReport:
    """Outcome of one path-following run (all objective values in nats)."""

    iterates: list
    objective_trace: np.ndarray
    iterations: int
    status: RunStatus
    wall_time: float
    init_iterations: int = 0
    init_trace: np.ndarray | None = None

    @property
    def final(self):
        return self.iterates[-1]

    @property
    def objective(self):
        return float(self.objective_trace[-1])


def init_mrt(scenario, ch):
    """Maximum-ratio transmission at full power: w_i = sqrt(P_i) h_ii/||h_ii||.

    Satisfies the power constraints with equality and keeps every signal
    trust region strictly positive.  Zero direct channels (which carry no
    preferred direction) fall back to a scaled random beam.
    """
    h = ch.known_direct
    M, Nt = scenario.M, scenario.Nt
    W = np.zeros((M, Nt), dtype=complex)
    rng = np.random.default_rng(0)
    for i in range(M):
        hi = h[i, i]
        nrm = np.linalg.norm(hi)
        if nrm > 0:
            W[i] = np.sqrt(scenario.P[i]) * hi / nrm
        else:
            v = rng.standard_normal(Nt) + 1j * rng.standard_normal(Nt)
            W[i] = np.sqrt(scenario.P[i]) * v / np.linalg.norm(v)
    return W


def _interior_power(W, scenario, shrink=1e-11):
    """Scale beamformers sitting on the power boundary slightly inside it."""
    norms = beam_norms_sq(W)
    cap = scenario.P * (1.0 - shrink)
    factor = np.sqrt(np.minimum(1.0, cap / np.maximum(norms, 1e-300)))
    return W * factor[:, None]


def _nudge_r_up(W, ch, scenario, r):
    """Smallest increase of each root making the outage equation strictly positive."""
    out = np.array(r, dtype=float)
    for i in range(len(out)):
        if rates.eve_outage_gap(W, ch, scenario, i, out[i]) > 0.0:
            continue
        step = max(1e-14, 1e-12 * out[i])
        for _ in range(80):
            if rates.eve_outage_gap(W, ch, scenario, i, out[i] + step) > 0.0:
                out[i] += step
                break
            step *= 4.0
    return out


def _nudge_R_down(W, ch, scenario, R):
    """Smallest decrease of each rate making the threshold gap strictly negative."""
    out = np.array(R, dtype=float)
    for i in range(len(out)):
        if rates.user_outage_gap(W, ch, scenario, i, out[i]) < 0.0:
            continue
        step = max(1e-14, 1e-12 * out[i])
        for _ in range(80):
            if rates.user_outage_gap(W, ch, scenario, i, out[i] - step) < 0.0:
                out[i] -= step
                break
            step *= 4.0
    return out


def _epigraph_start(lay, terms, x0):
    """Place the epigraph variable strictly below the smallest term value."""
    vals = [term.value(x0) for term in terms]
    lo = min(vals)
    x0 = x0.copy()
    x0[lay.t_index] = lo - max(1e-9, 1e-6 * abs(lo))
    return x0


def _check_tightness(label, built, exact, tol=1e-9):
    if abs(built - exact) > tol * max(1.0, abs(exact)):
        raise AssertionError(
            f"surrogate {label} not tight at expansion: {built} vs {exact}")


@dataclass
class _Loop:
    """Shared outer-loop driver; the six algorithms differ only in hooks."""

    scenario: object
    ch: object
    cfg: AlgorithmConfig
    objective: callable           # point -> float (exact objective, nats)
    build: callable               # point -> (SubproblemModel, Layout)
    tighten: callable             # (point, lay, x_opt) -> point
    qos_gap: callable = None      # point -> float, stop when >= qos_margin

    def run(self, point0, t_start=None):
        t0 = time.perf_counter() if t_start is None else t_start
        trace = [self.objective(point0)]
        iterates = [point0]
        point = point0
        status = RunStatus.MAX_ITER
        for _ in range(self.cfg.max_outer_iter):
            if self.qos_gap is not None and \
                    self.qos_gap(point) >= self.cfg.qos_margin:
                status = RunStatus.QOS_MET
                break
            try:
                model, lay = self.build(point)
                out = solve(model, self.cfg.feas_tol, self.cfg.opt_tol)
                if out.status is SolveStatus.NUMERICAL_FAILURE:
                    status = RunStatus.SOLVER_FALLBACK
                    break
                new_point = self.tighten(point, lay, out.x)
            except GuardViolation:
                # validity guards failing at the very start mean the problem
                # cannot be set up at this point at all
                status = RunStatus.INFEASIBLE if len(trace) == 1 \
                    else RunStatus.SOLVER_FALLBACK
                break
            except _RECOVERABLE:
                status = RunStatus.SOLVER_FALLBACK
                break
            obj_new = self.objective(new_point)
            if obj_new <= trace[-1]:
                status = RunStatus.CONVERGED
                break
            point = new_point
            iterates.append(point)
            trace.append(obj_new)
            rel = (trace[-1] - trace[-2]) / max(abs(trace[-2]), 1e-10)
            if rel <= self.cfg.eps_tol or abs(trace[-1]) < 1e-10:
                status = RunStatus.CONVERGED
                break
        return ConvergenceReport(
            iterates=iterates,
            objective_trace=np.asarray(trace),
            iterations=len(trace) - 1,
            status=status,
            wall_time=time.perf_counter() - t0,
        )


# ---------------------------------------------------------------------------
# perfect CSI
# ---------------------------------------------------------------------------

def _instant_terms(st, ch, scenario, lay, cfg, weights=None):
    """Per-user surrogate secrecy terms f_lb - g_ub and their trust constraints."""
    terms, cons = [], []
    for i in range(scenario.M):
        f, tf = build_f_lb(st, ch, scenario, lay, i, cfg.eta_scale)
        g, tg = build_g_ub(st, ch, scenario, lay, i, cfg.eta_scale)
        if cfg.debug_checks:
            x_k = lay.stack(st.W, r=st.r, R=st.R)
            _check_tightness("f_lb", f.value(x_k), rates.user_rate(st.W, ch, scenario, i))
            _check_tightness("g_ub", g.value(x_k),
                             rates.eve_rate_instant(st.W, ch, scenario, i))
        term = f - g
        if weights is not None:
            term = term.scaled(1.0 / weights[i])
        terms.append(term)
        cons.append(tf)
        if tg is not None:
            cons.append(tg)
    return terms, cons


def _build_maximin_instant(ch, scenario, cfg, weights=None):
    def build(point):
        W = point["W"]
        st = ExpansionState.at(W, ch, scenario)
        lay = Layout(scenario.M, scenario.Nt, epigraph=True)
        terms, cons = _instant_terms(st, ch, scenario, lay, cfg, weights)
        cons += [build_power_constraint(lay, scenario, i) for i in range(scenario.M)]
        t_row = lay.unit(lay.t_index)
        cons += [affine_expr(t_row) - term for term in terms]
        x0 = _epigraph_start(lay, terms, lay.stack(W, t=0.0))
        model = SubproblemModel(lay.n, affine_expr(t_row), cons, x0)
        return model, lay

    return build


def _tighten_instant(point, lay, x):
    W, _, _, _ = lay.split(x)
    return {"W": W, "r": None, "R": None}


def maximin_secrecy_perfect_csi(scenario, ch, cfg=None, _weights=None, _qos_gap=None):
    """Path-following maximin optimization of instantaneous secrecy throughput."""
    cfg = cfg or AlgorithmConfig()
    W0 = _interior_power(init_mrt(scenario, ch), scenario)
    point0 = {"W": W0, "r": None, "R": None}

    def objective(point):
        return rates.secrecy_maximin(point["W"], ch, scenario)

    loop = _Loop(scenario, ch, cfg, objective,
                 _build_maximin_instant(ch, scenario, cfg, _weights),
                 _tighten_instant, qos_gap=_qos_gap)
    return loop.run(point0)


def see_perfect_csi(scenario, ch, cfg=None):
    """SEE maximization under perfect CSI with QoS thresholds.

    Initialization maximizes the threshold-normalized worst secrecy rate
    min_i (f_i - g_i)/c_i until every threshold holds; afterwards each
    iteration solves the surrogate problem with the objective shifted by
    the current efficiency times the consumed power.
    """
    cfg = cfg or AlgorithmConfig()
    weights = np.maximum(scenario.c, 1e-6)

    def qos_gap(point):
        s = rates.secrecy_rates(point["W"], ch, scenario)
        return float(np.min(s - scenario.c))

    t_start = time.perf_counter()
    init = maximin_secrecy_perfect_csi(scenario, ch, cfg, _weights=weights,
                                       _qos_gap=qos_gap)
    if init.status is not RunStatus.QOS_MET:
        status = RunStatus.INFEASIBLE if init.status in (
            RunStatus.CONVERGED, RunStatus.MAX_ITER) else init.status
        return ConvergenceReport(init.iterates, init.objective_trace,
                                 init.iterations, status,
                                 time.perf_counter() - t_start,
                                 init_iterations=init.iterations)

    def objective(point):
        return rates.see_ratio(point["W"], ch, scenario)

    def build(point):
        W = point["W"]
        theta = objective(point)
        st = ExpansionState.at(W, ch, scenario)
        lay = Layout(scenario.M, scenario.Nt)
        terms, cons = _instant_terms(st, ch, scenario, lay, cfg)
        cons += [build_power_constraint(lay, scenario, i) for i in range(scenario.M)]
        cons += [Expr((), float(scenario.c[i])) - terms[i] for i in range(scenario.M)]
        all_norm_rows = np.vstack([lay.norm_rows(i) for i in range(scenario.M)])
        obj = sum(terms, Expr()) + Expr(
            (SquaredForms(all_norm_rows, -theta * scenario.zeta),),
            -theta * scenario.Pc)
        model = SubproblemModel(lay.n, obj, cons, lay.stack(W))
        return model, lay

    loop = _Loop(scenario, ch, cfg, objective, build, _tighten_instant)
    report = loop.run(init.final, t_start=t_start)
    report.init_iterations = init.iterations
    report.init_trace = init.objective_trace
    report.iterations += init.iterations
    return report


# ---------------------------------------------------------------------------
# eavesdropper-outage regime
# ---------------------------------------------------------------------------

def _ev_secrecy(W, ch, scenario, r):
    """Per-user f_i - ln(1+r_i), independent of the scenario's regime flag.

    This is the eavesdropper-outage secrecy objective; it is also used as
    the warm-start objective of the user-outage loops, where the known user
    channels are the nominal estimates.
    """
    f = np.array([rates.user_rate(W, ch, scenario, i)
                  for i in range(scenario.M)])
    return f - np.log1p(np.asarray(r, dtype=float))


def _ev_terms(st, ch, scenario, lay, cfg):
    """Surrogate terms f_lb - a_ub and the shared constraint block."""
    terms, cons = [], []
    for i in range(scenario.M):
        f, tf = build_f_lb(st, ch, scenario, lay, i, cfg.eta_scale)
        terms.append(f - build_a_ub(st, lay, i))
        cons.append(tf)
    cons += _ev_outage_block(st, ch, scenario, lay, cfg)
    return terms, cons


def _ev_outage_block(st, ch, scenario, lay, cfg):
    """Power, norm trust regions, r floors and the outage-equation constraints."""
    cons = [build_power_constraint(lay, scenario, i) for i in range(scenario.M)]
    cons += [build_w_trust(st, lay, j, cfg.eta_scale) for j in range(scenario.M)]
    for i in range(scenario.M):
        gio = build_g_io_lb(st, ch, scenario, lay, i)
        if cfg.debug_checks:
            x_k = lay.stack(st.W, r=st.r, R=st.R)
            _check_tightness("g_io_lb", gio.value(x_k),
                             rates.eve_outage_gap(st.W, ch, scenario, i, st.r[i]))
        cons.append(-gio)
        cons.append(affine_expr(-lay.unit(lay.r_index(i)), _RATE_FLOOR))
    return cons


def maximin_secrecy_ev_outage(scenario, ch, cfg=None, _qos_gap=None):
    """Maximin secrecy throughput with a statistically known eavesdropper.

    Each iteration solves the surrogate subproblem for (w, r), then
    re-tightens every r_i to the exact root of the outage equation inside
    the solver's relaxed value, so the accepted iterate always satisfies
    0 <= g_io(w, r_i) <= eps_b.
    """
    cfg = cfg or AlgorithmConfig()
    W0 = _interior_power(init_mrt(scenario, ch), scenario)
    r0 = np.array([rates.eve_outage_sinr(W0, ch, scenario, i, cfg.eps_b)
                   for i in range(scenario.M)])
    point0 = {"W": W0, "r": r0, "R": None}

    def objective(point):
        return float(_ev_secrecy(point["W"], ch, scenario, point["r"]).min())

    def build(point):
        W, r = point["W"], point["r"]
        st = ExpansionState.at(W, ch, scenario, r=r)
        lay = Layout(scenario.M, scenario.Nt, with_r=True, epigraph=True)
        terms, cons = _ev_terms(st, ch, scenario, lay, cfg)
        t_row = lay.unit(lay.t_index)
        cons += [affine_expr(t_row) - term for term in terms]
        r_start = _nudge_r_up(W, ch, scenario, r)
        x0 = _epigraph_start(lay, terms, lay.stack(W, r=r_start, t=0.0))
        model = SubproblemModel(lay.n, affine_expr(t_row), cons, x0)
        return model, lay

    def tighten(point, lay, x):
        W, r_u, _, _ = lay.split(x)
        r_new = np.array([rates.eve_outage_sinr(W, ch, scenario, i, cfg.eps_b,
                                                r_hint=r_u[i])
                          for i in range(scenario.M)])
        return {"W": W, "r": r_new, "R": None}

    loop = _Loop(scenario, ch, cfg, objective, build, tighten, qos_gap=_qos_gap)
    return loop.run(point0)


def see_ev_outage(scenario, ch, cfg=None):
    """SEE maximization in the eavesdropper-outage regime."""
    cfg = cfg or AlgorithmConfig()

    def qos_gap(point):
        s = rates.secrecy_rates(point["W"], ch, scenario, r=point["r"])
        return float(np.min(s - scenario.c))

    t_start = time.perf_counter()
    init = maximin_secrecy_ev_outage(scenario, ch, cfg, _qos_gap=qos_gap)
    if init.status is not RunStatus.QOS_MET:
        status = RunStatus.INFEASIBLE if init.status in (
            RunStatus.CONVERGED, RunStatus.MAX_ITER) else init.status
        return ConvergenceReport(init.iterates, init.objective_trace,
                                 init.iterations, status,
                                 time.perf_counter() - t_start,
                                 init_iterations=init.iterations)

    def objective(point):
        return rates.see_ratio(point["W"], ch, scenario, r=point["r"])

    def build(point):
        W, r = point["W"], point["r"]
        theta = objective(point)
        st = ExpansionState.at(W, ch, scenario, r=r)
        lay = Layout(scenario.M, scenario.Nt, with_r=True)
        terms, cons = _ev_terms(st, ch, scenario, lay, cfg)
        cons += [Expr((), float(scenario.c[i])) - terms[i] for i in range(scenario.M)]
        all_norm_rows = np.vstack([lay.norm_rows(i) for i in range(scenario.M)])
        obj = sum(terms, Expr()) + Expr(
            (SquaredForms(all_norm_rows, -theta * scenario.zeta),),
            -theta * scenario.Pc)
        r_start = _nudge_r_up(W, ch, scenario, r)
        model = SubproblemModel(lay.n, obj, cons, lay.stack(W, r=r_start))
        return model, lay

    def tighten(point, lay, x):
        W, r_u, _, _ = lay.split(x)
        r_new = np.array([rates.eve_outage_sinr(W, ch, scenario, i, cfg.eps_b,
                                                r_hint=r_u[i])
                          for i in range(scenario.M)])
        return {"W": W, "r": r_new, "R": None}

    loop = _Loop(scenario, ch, cfg, objective, build, tighten)
    report = loop.run(init.final, t_start=t_start)
    report.init_iterations = init.iterations
    report.init_trace = init.objective_trace
    report.iterations += init.iterations
    return report


# ---------------------------------------------------------------------------
# user-outage (uncertain user channels) regime
# ---------------------------------------------------------------------------

def _user_terms(st, ch, scenario, lay, cfg):
    """Surrogate terms ln(1+R_i) - a_ub and the full robust constraint block."""
    terms = [build_rate_term(lay, i) - build_a_ub(st, lay, i)
             for i in range(scenario.M)]
    cons = _ev_outage_block(st, ch, scenario, lay, cfg)
    cons += build_robust_constraints(st, ch, scenario, lay, cfg.eta_scale)
    for i in range(scenario.M):
        if cfg.debug_checks:
            x_k = lay.stack(st.W, r=st.r, R=st.R)
            _check_tightness(
                "varphi_lb",
                build_varphi_lb(st, ch, scenario, lay, i).value(x_k),
                rates.sinr_margin(st.W, ch, scenario, i, st.R[i]))
        cons.append(affine_expr(-lay.unit(lay.R_index(i)), _RATE_FLOOR))
    return terms, cons


def _user_point0(scenario, ch, cfg):
    """Warm start for the user-outage loops from the EV-outage solution."""
    init = maximin_secrecy_ev_outage(scenario, ch, cfg)
    if init.status is RunStatus.SOLVER_FALLBACK and len(init.iterates) == 1:
        raise InfeasibleStart("eavesdropper-outage warm start failed")
    W, r = init.final["W"], init.final["r"]
    R = np.array([rates.user_outage_sinr(W, ch, scenario, i, cfg.eps_b)
                  for i in range(scenario.M)])
    return {"W": W, "r": r, "R": R}, init.iterations


def maximin_secrecy_user_outage(scenario, ch, cfg=None, _qos_gap=None,
                                _point0=None):
    """Maximin of the certified secrecy bound ln(1+R_i) - ln(1+r_i).

    R_i is the outage-certified user SINR under channel perturbations and
    r_i the eps_ev-outage wiretap SINR; both are re-tightened by bisection
    after every subproblem solve, so accepted iterates satisfy the one-sided
    root conditions exactly.
    """
    cfg = cfg or AlgorithmConfig()
    t_start = time.perf_counter()
    init_iters = 0
    try:
        if _point0 is None:
            point0, init_iters = _user_point0(scenario, ch, cfg)
        else:
            point0 = _point0
    except _RECOVERABLE:
        return ConvergenceReport([], np.zeros(0), 0, RunStatus.INFEASIBLE,
                                 time.perf_counter() - t_start)

    def objective(point):
        return rates.secrecy_maximin(point["W"], ch, scenario,
                                     r=point["r"], R=point["R"])

    def build(point):
        W, r, R = point["W"], point["r"], point["R"]
        st = ExpansionState.at(W, ch, scenario, r=r, R=R)
        lay = Layout(scenario.M, scenario.Nt, with_r=True, with_R=True,
                     epigraph=True)
        terms, cons = _user_terms(st, ch, scenario, lay, cfg)
        t_row = lay.unit(lay.t_index)
        cons += [affine_expr(t_row) - term for term in terms]
        r_start = _nudge_r_up(W, ch, scenario, r)
        R_start = _nudge_R_down(W, ch, scenario, R)
        x0 = _epigraph_start(lay, terms,
                             lay.stack(W, r=r_start, R=R_start, t=0.0))
        model = SubproblemModel(lay.n, affine_expr(t_row), cons, x0)
        return model, lay

    def tighten(point, lay, x):
        W, r_u, R_l, _ = lay.split(x)
        r_new = np.array([rates.eve_outage_sinr(W, ch, scenario, i, cfg.eps_b,
                                                r_hint=r_u[i])
                          for i in range(scenario.M)])
        R_new = np.array([rates.user_outage_sinr(W, ch, scenario, i, cfg.eps_b,
                                                 R_hint=R_l[i])
                          for i in range(scenario.M)])
        return {"W": W, "r": r_new, "R": R_new}

    loop = _Loop(scenario, ch, cfg, objective, build, tighten, qos_gap=_qos_gap)
    report = loop.run(point0, t_start=t_start)
    report.init_iterations = init_iters
    report.iterations += init_iters
    return report


def see_user_outage(scenario, ch, cfg=None):
    """SEE maximization in the user-outage regime."""
    cfg = cfg or AlgorithmConfig()

    def qos_gap(point):
        s = rates.secrecy_rates(point["W"], ch, scenario,
                                r=point["r"], R=point["R"])
        return float(np.min(s - scenario.c))

    t_start = time.perf_counter()
    init = maximin_secrecy_user_outage(scenario, ch, cfg, _qos_gap=qos_gap)
    if init.status is not RunStatus.QOS_MET:
        status = RunStatus.INFEASIBLE if init.status in (
            RunStatus.CONVERGED, RunStatus.MAX_ITER) else init.status
        return ConvergenceReport(init.iterates, init.objective_trace,
                                 init.iterations, status,
                                 time.perf_counter() - t_start,
                                 init_iterations=init.iterations)

    def objective(point):
        return rates.see_ratio(point["W"], ch, scenario,
                               r=point["r"], R=point["R"])

    def build(point):
        W, r, R = point["W"], point["r"], point["R"]
        theta = objective(point)
        st = ExpansionState.at(W, ch, scenario, r=r, R=R)
        lay = Layout(scenario.M, scenario.Nt, with_r=True, with_R=True)
        terms, cons = _user_terms(st, ch, scenario, lay, cfg)
        cons += [Expr((), float(scenario.c[i])) - terms[i] for i in range(scenario.M)]
        all_norm_rows = np.vstack([lay.norm_rows(i) for i in range(scenario.M)])
        obj = sum(terms, Expr()) + Expr(
            (SquaredForms(all_norm_rows, -theta * scenario.zeta),),
            -theta * scenario.Pc)
        r_start = _nudge_r_up(W, ch, scenario, r)
        R_start = _nudge_R_down(W, ch, scenario, R)
        model = SubproblemModel(lay.n, obj, cons,
                                lay.stack(W, r=r_start, R=R_start))
        return model, lay

    def tighten(point, lay, x):
        W, r_u, R_l, _ = lay.split(x)
        r_new = np.array([rates.eve_outage_sinr(W, ch, scenario, i, cfg.eps_b,
                                                r_hint=r_u[i])
                          for i in range(scenario.M)])
        R_new = np.array([rates.user_outage_sinr(W, ch, scenario, i, cfg.eps_b,
                                                 R_hint=R_l[i])
                          for i in range(scenario.M)])
        return {"W": W, "r": r_new, "R": R_new}

    loop = _Loop(scenario, ch, cfg, objective, build, tighten)
    report = loop.run(init.final, t_start=t_start)
    report.init_iterations = init.iterations
    report.init_trace = init.objective_trace
    report.iterations += init.iterations
    return report


def run_for_regime(scenario, ch, problem="maximin", cfg=None):
    """Dispatch to the right loop for the scenario's regime.

    ``problem`` is "maximin" or "see".
    """
    table = {
        (Regime.PERFECT_CSI, "maximin"): maximin_secrecy_perfect_csi,
        (Regime.PERFECT_CSI, "see"): see_perfect_csi,
        (Regime.EV_OUTAGE, "maximin"): maximin_secrecy_ev_outage,
        (Regime.EV_OUTAGE, "see"): see_ev_outage,
        (Regime.USER_OUTAGE, "maximin"): maximin_secrecy_user_outage,
        (Regime.USER_OUTAGE, "see"): see_user_outage,
    }
    try:
        fn = table[(scenario.regime, problem)]
    except KeyError:
        raise ValueError(f"unknown problem {problem!r}") from None
    return fn(scenario, ch, cfg)
