"""Reproducible experiment sweeps: config parsing, runs, validation, output.

A sweep crosses power budgets, channel-knowledge regimes and seeded channel
draws for one problem family (maximin secrecy or SEE).  Channel draws are
shared across regimes and power levels within a seed (paired comparison;
recorded in the output metadata).  Results are persisted as a CSV table with
a fixed schema plus a JSON file that additionally carries the solutions, so
Monte-Carlo validation can be re-run later from the file alone.

Units at this boundary: rates in bps/Hz, SEE values in bits per Joule per
Hz (power kept in mW), transmit power in mW.  Everything internal is nats.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import rates
from .algorithms import AlgorithmConfig, RunStatus, run_for_regime
from .errors import ConfigError, SecbeamError
from .kernels import BACKEND
from .model import LN2, ChannelSet, Regime, Scenario, beam_norms_sq, sample_channels

_PAIRING_NOTE = ("channel draws are shared across regimes and power levels "
                 "within each seed (paired comparison)")


@dataclass(frozen=True)
class RegimeSpec:
    """One regime column of a sweep: the regime plus its wiretap outage level."""

    regime: Regime
    eps_ev: float

    @property
    def label(self):
        if self.regime is Regime.PERFECT_CSI:
            return "perfect"
        short = "ev_outage" if self.regime is Regime.EV_OUTAGE else "user_outage"
        return f"{short}_eps{self.eps_ev:g}"

    @classmethod
    def parse(cls, token):
        token = token.strip().lower()
        if token in ("perfect", "perfect_csi"):
            return cls(Regime.PERFECT_CSI, 0.1)
        name, _, eps = token.partition(":")
        eps_val = float(eps) if eps else 0.1
        if not 0.0 < eps_val < 1.0:
            raise ConfigError(f"outage level out of (0,1) in regime token {token!r}")
        if name in ("ev", "ev_outage"):
            return cls(Regime.EV_OUTAGE, eps_val)
        if name in ("user", "user_outage"):
            return cls(Regime.USER_OUTAGE, eps_val)
        raise ConfigError(f"unknown regime token {token!r}")


@dataclass
class ExperimentConfig:
    M: int = 2
    Nt: int = 4
    sigma_user: float = 1.0
    sigma_eve: float = 1.0
    zeta: float = 2.5
    Pa: float = 1.25
    c_bps: float | None = None
    eps_user: float = 0.1
    delta: float = 0.001
    eve_var: float = 1.0
    problem: str = "maximin"
    P_sweep: list = field(default_factory=lambda: [10.0, 20.0, 30.0, 40.0, 50.0])
    regimes: list = field(default_factory=lambda: [RegimeSpec(Regime.PERFECT_CSI, 0.1)])
    n_seeds: int = 1
    seed0: int = 1
    mc_samples: int = 100000
    output_dir: str = "results"
    eps_tol: float = 1e-4
    max_outer_iter: int = 200

    def __post_init__(self):
        if not self.P_sweep:
            raise ConfigError("sweep.P must be a nonempty list")
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be at least 1")
        if self.problem not in ("maximin", "see"):
            raise ConfigError(f"unknown problem {self.problem!r}")

    def scenario(self, spec, P):
        return Scenario.default(
            M=self.M, Nt=self.Nt, P=P, regime=spec.regime, c_bps=self.c_bps,
            sigma_u=self.sigma_user, sigma_e=self.sigma_eve, zeta=self.zeta,
            Pa=self.Pa, eps_ev=spec.eps_ev, eps_user=self.eps_user,
            delta=self.delta)

    def algorithm_config(self):
        return AlgorithmConfig(eps_tol=self.eps_tol,
                               max_outer_iter=self.max_outer_iter)


_KEY_MAP = {
    "scenario.m": ("M", int),
    "scenario.nt": ("Nt", int),
    "scenario.sigma_user": ("sigma_user", float),
    "scenario.sigma_eve": ("sigma_eve", float),
    "scenario.zeta": ("zeta", float),
    "scenario.pa": ("Pa", float),
    "scenario.c_bps": ("c_bps", float),
    "scenario.eps_user": ("eps_user", float),
    "scenario.delta": ("delta", float),
    "scenario.eve_var": ("eve_var", float),
    "problem": ("problem", str),
    "sweep.p": ("P_sweep", "float_list"),
    "regimes": ("regimes", "regime_list"),
    "n_seeds": ("n_seeds", int),
    "seed0": ("seed0", int),
    "mc_samples": ("mc_samples", int),
    "output_dir": ("output_dir", str),
    "algorithm.eps_tol": ("eps_tol", float),
    "algorithm.max_outer_iter": ("max_outer_iter", int),
}


def parse_config(text):
    """Parse the flat dotted-key config format into an ExperimentConfig.

    Lines are ``key = value``; '#' starts a comment; lists are
    comma-separated.  Unknown keys and malformed values raise ConfigError.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        val = val.strip()
        if key not in _KEY_MAP:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, conv = _KEY_MAP[key]
        try:
            if conv == "float_list":
                values[attr] = [float(tok) for tok in val.split(",") if tok.strip()]
            elif conv == "regime_list":
                values[attr] = [RegimeSpec.parse(tok) for tok in val.split(",")
                                if tok.strip()]
            else:
                values[attr] = conv(val)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"line {lineno}: bad value for {key}: {e}") from None
    return ExperimentConfig(**values)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass
class ResultRow:
    """One sweep cell; field order fixes the CSV column order."""

    regime: str
    M: int
    P: float
    seed: object          # int, or "mean"/"std" for aggregate rows
    objective: float      # bps/Hz (maximin) or bits/J/Hz (see)
    sum_secrecy: float    # bps/Hz
    transmit_power: float  # sum ||w_i||^2, mW
    iterations: int
    status: str
    mc_outage: str        # ';'-joined per-user outage estimates, '' if none

    @classmethod
    def fields(cls):
        return [f.name for f in dataclasses.fields(cls)]


def _draw_shared_channels(cfg, seed):
    """One seed's channel draw, regime-agnostic (used by all sweep cells)."""
    proxy = Scenario.default(M=cfg.M, Nt=cfg.Nt, P=cfg.P_sweep[0],
                             regime=Regime.PERFECT_CSI)
    full = sample_channels(proxy, seed)
    var = np.broadcast_to(np.asarray(cfg.eve_var, dtype=float), (cfg.M,)).copy()
    return {
        Regime.PERFECT_CSI: full,
        Regime.EV_OUTAGE: ChannelSet(h_direct=full.h_direct, h_eve_var=var),
        Regime.USER_OUTAGE: ChannelSet(h_nominal=full.h_direct, h_eve_var=var),
    }


def validate_solution(scenario, ch, point, mc_samples, seed):
    """Monte-Carlo outage checks at a solved point.

    Eavesdropper-outage solutions must hit the outage level exactly
    (|estimate - eps_ev| <= 3 standard errors); user-outage certified rates
    must be conservative (estimate <= eps_user + 3 standard errors).
    """
    if scenario.regime is Regime.PERFECT_CSI:
        return {"kind": "none", "estimates": [], "std_errors": [], "ok": True}
    W = point["W"]
    if scenario.regime is Regime.EV_OUTAGE:
        est, se = rates.mc_eve_outage(W, ch, scenario, point["r"], mc_samples, seed)
        ok = bool(np.all(np.abs(est - scenario.eps_ev) <= 3.0 * se))
        return {"kind": "eve", "estimates": est.tolist(),
                "std_errors": se.tolist(), "ok": ok}
    est, se = rates.mc_user_outage(W, ch, scenario, point["R"], mc_samples, seed)
    ok = bool(np.all(est <= scenario.eps_user + 3.0 * se))
    return {"kind": "user", "estimates": est.tolist(),
            "std_errors": se.tolist(), "ok": ok}


def _cell(cfg, spec, P, seed, channels, algo_cfg, mc_seed):
    """Run one sweep cell and return (row, solution dict or None)."""
    scenario = cfg.scenario(spec, P)
    ch = channels[spec.regime]
    label = spec.label
    try:
        rep = run_for_regime(scenario, ch, cfg.problem, algo_cfg)
    except (SecbeamError, RuntimeError, np.linalg.LinAlgError) as e:
        row = ResultRow(label, cfg.M, P, seed, math.nan, math.nan, math.nan,
                        0, f"error:{type(e).__name__}", "")
        return row, None
    if not rep.iterates or rep.status is RunStatus.INFEASIBLE:
        # no feasible point for this problem family; keep the bookkeeping
        row = ResultRow(label, cfg.M, P, seed, math.nan, math.nan, math.nan,
                        rep.iterations, rep.status.value, "")
        return row, None
    point = rep.final
    W = point["W"]
    s = rates.secrecy_rates(W, ch, scenario, r=point["r"], R=point["R"])
    objective = rep.objective / LN2
    mc = ""
    if cfg.mc_samples > 0 and scenario.regime is not Regime.PERFECT_CSI:
        check = validate_solution(scenario, ch, point, cfg.mc_samples, mc_seed)
        mc = ";".join(repr(v) for v in check["estimates"])
    row = ResultRow(label, cfg.M, P, seed, objective, float(s.sum()) / LN2,
                    float(beam_norms_sq(W).sum()), rep.iterations,
                    rep.status.value, mc)
    sol = {
        "regime": label, "P": P, "seed": seed,
        "W_re": W.real.tolist(), "W_im": W.imag.tolist(),
        "r": None if point["r"] is None else list(map(float, point["r"])),
        "R": None if point["R"] is None else list(map(float, point["R"])),
    }
    return row, sol


def run_sweep(cfg):
    """Run the full sweep; returns (rows incl. aggregates, json payload)."""
    algo_cfg = cfg.algorithm_config()
    rows, solutions = [], []
    for k in range(cfg.n_seeds):
        seed = cfg.seed0 + k
        channels = _draw_shared_channels(cfg, seed)
        for pi, P in enumerate(cfg.P_sweep):
            for si, spec in enumerate(cfg.regimes):
                mc_seed = int(np.random.SeedSequence(
                    [seed, pi, si]).generate_state(1)[0])
                row, sol = _cell(cfg, spec, P, seed, channels, algo_cfg, mc_seed)
                rows.append(row)
                if sol is not None:
                    solutions.append(sol)
    # emission order is independent of the cell execution order
    rows.sort(key=lambda r: (r.regime, r.P, r.seed))
    solutions.sort(key=lambda s: (s["regime"], s["P"], s["seed"]))
    rows += _aggregate(cfg, rows)
    payload = {
        "config": _config_dict(cfg),
        "metadata": {"pairing": _PAIRING_NOTE, "kernel_backend": BACKEND},
        "columns": ResultRow.fields(),
        "rows": [dataclasses.asdict(r) for r in rows],
        "solutions": solutions,
    }
    return rows, payload


def _aggregate(cfg, rows):
    agg = []
    for spec in cfg.regimes:
        for P in cfg.P_sweep:
            cell = [r for r in rows if r.regime == spec.label and r.P == P
                    and isinstance(r.seed, int)]
            ok = [r for r in cell if not r.status.startswith("error")
                  and not math.isnan(r.objective)]
            if not cell:
                continue
            for stat, fn in (("mean", np.mean), ("std", np.std)):
                if ok:
                    obj, ssum, pw, it = (fn([getattr(r, f) for r in ok])
                                         for f in ("objective", "sum_secrecy",
                                                   "transmit_power", "iterations"))
                else:
                    obj = ssum = pw = it = math.nan
                agg.append(ResultRow(spec.label, cfg.M, P, stat, float(obj),
                                     float(ssum), float(pw), float(it),
                                     "aggregate", ""))
    return agg


def _config_dict(cfg):
    d = dataclasses.asdict(cfg)
    d["regimes"] = [s.label for s in cfg.regimes]
    d["_regime_tokens"] = [
        {"regime": s.regime.value, "eps_ev": s.eps_ev} for s in cfg.regimes]
    return d


def emit_csv(rows, path):
    """Write the result table; full-precision floats, fixed column order."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ResultRow.fields())
        for r in rows:
            w.writerow([_csv_cell(getattr(r, f)) for f in ResultRow.fields()])


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def emit_json(payload, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_rows_csv(path):
    """Parse a results CSV back into ResultRow objects."""
    import csv

    out = []
    with open(path, "r", encoding="utf-8") as fh:
        rd = csv.DictReader(fh)
        for rec in rd:
            seed = rec["seed"]
            iters = float(rec["iterations"])  # aggregate rows carry means
            out.append(ResultRow(
                regime=rec["regime"], M=int(rec["M"]), P=float(rec["P"]),
                seed=int(seed) if seed.lstrip("-").isdigit() else seed,
                objective=float(rec["objective"]),
                sum_secrecy=float(rec["sum_secrecy"]),
                transmit_power=float(rec["transmit_power"]),
                iterations=int(iters) if iters.is_integer() else iters,
                status=rec["status"], mc_outage=rec["mc_outage"]))
    return out


def render_iteration_table(rows, problem="maximin"):
    """Average-iteration table (regimes x power levels) as plain text."""
    data = [r for r in rows if isinstance(r.seed, str) and r.seed == "mean"]
    if not data:
        data = rows
    regimes = sorted({r.regime for r in data})
    powers = sorted({r.P for r in data})
    lines = [f"Average outer iterations ({problem})"]
    header = "P_i (mW)".ljust(22) + "".join(f"{p:>9g}" for p in powers)
    lines.append(header)
    for reg in regimes:
        cells = []
        for p in powers:
            vals = [r.iterations for r in data if r.regime == reg and r.P == p]
            cells.append(f"{np.mean(vals):>9.1f}" if vals else f"{'-':>9}")
        lines.append(reg.ljust(22) + "".join(cells))
    return "\n".join(lines)


def revalidate_payload(payload, mc_samples=None, seed=7):
    """Re-run the Monte-Carlo checks on a stored results payload.

    Returns (records, all_ok); each record carries the per-user estimates
    and the pass verdict for one stored solution.
    """
    cfgd = dict(payload["config"])
    tokens = cfgd.pop("_regime_tokens")
    labels = {RegimeSpec(Regime(t["regime"]), t["eps_ev"]).label:
              RegimeSpec(Regime(t["regime"]), t["eps_ev"]) for t in tokens}
    cfg = ExperimentConfig(**{k: v for k, v in cfgd.items() if k != "regimes"},
                           regimes=list(labels.values()))
    n = mc_samples or cfg.mc_samples
    records = []
    all_ok = True
    for sol in payload["solutions"]:
        spec = labels[sol["regime"]]
        if spec.regime is Regime.PERFECT_CSI:
            continue
        scenario = cfg.scenario(spec, sol["P"])
        channels = _draw_shared_channels(cfg, sol["seed"])
        W = np.asarray(sol["W_re"]) + 1j * np.asarray(sol["W_im"])
        point = {"W": W,
                 "r": None if sol["r"] is None else np.asarray(sol["r"]),
                 "R": None if sol["R"] is None else np.asarray(sol["R"])}
        rec = validate_solution(scenario, channels[spec.regime], point, n, seed)
        rec.update(regime=sol["regime"], P=sol["P"], seed=sol["seed"])
        records.append(rec)
        all_ok &= rec["ok"]
    return records, all_ok
