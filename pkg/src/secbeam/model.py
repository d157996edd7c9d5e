"""Network scenario, channel sampling and elementary beamformer computations.

Conventions used throughout the package:

* ``M`` transmitter-user pairs, ``Nt`` antennas per transmitter, single-antenna
  users and a single-antenna eavesdropper.
* Channels are stored as complex arrays; ``h_direct[j, i]`` is the vector
  channel from transmitter ``j`` to user ``i``.
* A beamformer set is a complex ``(M, Nt)`` array ``W`` with row ``i`` the
  beamformer of transmitter ``i``.  The optimization layer works on the real
  stacked vector produced by :func:`stack_beamformers`.
* All powers are in mW and all rates are in nats/s/Hz; conversion to bps/Hz
  happens only at the reporting boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Regime(enum.Enum):
    """Channel-knowledge regime of a scenario."""

    PERFECT_CSI = "perfect"
    EV_OUTAGE = "ev_outage"
    USER_OUTAGE = "user_outage"


#: nats per bit, used when converting reported rates.
LN2 = math.log(2.0)


def bps_to_nats(x):
    """Convert a rate in bps/Hz to nats/s/Hz."""
    return np.asarray(x, dtype=float) * LN2


def nats_to_bps(x):
    """Convert a rate in nats/s/Hz to bps/Hz."""
    return np.asarray(x, dtype=float) / LN2


@dataclass(frozen=True)
class Scenario:
    """All fixed parameters of one network instance.

    Parameters
    ----------
    M, Nt : int
        Number of transmitter-user pairs and antennas per transmitter.
    P : ndarray, shape (M,)
        Per-transmitter power limits in mW.
    sigma_u : ndarray, shape (M,)
        User noise powers sigma_i^2 in mW.
    sigma_e : float
        Eavesdropper noise power sigma_e^2 in mW.
    zeta : float
        Reciprocal of the power-amplifier drain efficiency (consumed
        transmit power is ``zeta * sum ||w_i||^2``).
    Pc : float
        Total circuit power in mW.
    c : ndarray, shape (M,)
        Per-user QoS thresholds in nats/s/Hz.
    eps_ev : float
        Eavesdropper outage level in (0, 1).
    eps_user : float
        User outage level in (0, 1).
    delta : float
        Channel-error scale of the user-channel uncertainty model.
    regime : Regime
        Channel-knowledge regime.
    """

    M: int
    Nt: int
    P: np.ndarray
    sigma_u: np.ndarray
    sigma_e: float
    zeta: float = 2.5
    Pc: float = 0.0
    c: np.ndarray = field(default=None)
    eps_ev: float = 0.1
    eps_user: float = 0.1
    delta: float = 0.001
    regime: Regime = Regime.PERFECT_CSI

    def __post_init__(self):
        P = np.atleast_1d(np.asarray(self.P, dtype=float))
        if P.size == 1:
            P = np.full(self.M, float(P[0]))
        sigma_u = np.atleast_1d(np.asarray(self.sigma_u, dtype=float))
        if sigma_u.size == 1:
            sigma_u = np.full(self.M, float(sigma_u[0]))
        c = self.c if self.c is not None else np.zeros(self.M)
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if c.size == 1:
            c = np.full(self.M, float(c[0]))
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "sigma_u", sigma_u)
        object.__setattr__(self, "c", c)
        if self.M < 1 or self.Nt < 1:
            raise ValueError("M and Nt must be at least 1")
        if P.shape != (self.M,) or sigma_u.shape != (self.M,) or c.shape != (self.M,):
            raise ValueError("P, sigma_u and c must have shape (M,)")
        if not (np.all(P > 0) and np.all(sigma_u > 0) and self.sigma_e > 0):
            raise ValueError("power limits and noise powers must be positive")
        if not (0.0 < self.eps_ev < 1.0 and 0.0 < self.eps_user < 1.0):
            raise ValueError("outage levels must lie in (0, 1)")
        if self.delta <= 0:
            raise ValueError("channel-error scale delta must be positive")
        if self.zeta <= 0 or self.Pc < 0:
            raise ValueError("zeta must be positive and Pc nonnegative")
        if np.any(c < 0):
            raise ValueError("QoS thresholds must be nonnegative")

    @classmethod
    def default(cls, M, P, regime=Regime.PERFECT_CSI, Nt=4, c_bps=None, *,
                sigma_u=1.0, sigma_e=1.0, zeta=2.5, Pa=1.25, eps_ev=0.1,
                eps_user=0.1, delta=0.001):
        """Scenario with the simulation defaults.

        ``zeta`` corresponds to a 40% drain efficiency and ``Pc`` is one
        circuit-power term ``Pa`` per transmit antenna.  ``c_bps`` is the QoS
        threshold in bps/Hz (converted to nats internally); the conventional
        values are 2.0 for M=2, 1.0 for M=5 and 0.6 for M=6.
        """
        if c_bps is None:
            c_bps = {2: 2.0, 5: 1.0, 6: 0.6}.get(M, 1.0)
        return cls(
            M=M,
            Nt=Nt,
            P=np.full(M, float(P)),
            sigma_u=np.full(M, float(sigma_u)),
            sigma_e=float(sigma_e),
            zeta=float(zeta),
            Pc=float(M * Nt * Pa),
            c=bps_to_nats(np.full(M, float(c_bps))),
            eps_ev=eps_ev,
            eps_user=eps_user,
            delta=delta,
            regime=regime,
        )


@dataclass(frozen=True)
class ChannelSet:
    """Channel realizations for one scenario.

    Only the fields required by the scenario's regime are populated:
    ``h_direct`` (perfect CSI / eavesdropper-outage), ``h_eve_vec`` (perfect
    CSI), ``h_eve_var`` (the per-transmitter wiretap variance scalars of the
    statistical eavesdropper model) and ``h_nominal`` (nominal user channels
    of the uncertain-channel regime).
    """

    h_direct: np.ndarray | None = None
    h_eve_vec: np.ndarray | None = None
    h_eve_var: np.ndarray | None = None
    h_nominal: np.ndarray | None = None

    @property
    def known_direct(self):
        """User channels available to the optimizer (true or nominal)."""
        return self.h_direct if self.h_direct is not None else self.h_nominal

    def validate_for(self, scenario):
        """Raise ValueError if fields required by the regime are missing."""
        reg = scenario.regime
        if reg is Regime.PERFECT_CSI:
            missing = self.h_direct is None or self.h_eve_vec is None
        elif reg is Regime.EV_OUTAGE:
            missing = self.h_direct is None or self.h_eve_var is None
        else:
            missing = self.h_nominal is None or self.h_eve_var is None
        if missing:
            raise ValueError(f"channel set is missing fields for regime {reg}")
        if self.h_eve_var is not None and not np.all(self.h_eve_var > 0):
            raise ValueError("wiretap variance scalars must be positive")


def _crandn(rng, shape):
    """i.i.d. complex normal entries: real and imaginary parts each N(0, 1/2)."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def sample_channels(scenario, seed, eve_var=1.0):
    """Draw a channel set for ``scenario``, deterministic in ``seed``.

    All complex entries are i.i.d. CN(0, 1).  Independent seed streams are
    used for the direct and eavesdropper blocks so the direct channels are
    identical across regimes for the same seed (paired comparisons).
    ``eve_var`` sets the wiretap variance scalars used by the statistical
    eavesdropper regimes (scalar or length-M array).
    """
    M, Nt = scenario.M, scenario.Nt
    ss = np.random.SeedSequence(seed)
    s_direct, s_eve = ss.spawn(2)
    direct = _crandn(np.random.default_rng(s_direct), (M, M, Nt))
    if scenario.regime is Regime.PERFECT_CSI:
        eve = _crandn(np.random.default_rng(s_eve), (M, Nt))
        cs = ChannelSet(h_direct=direct, h_eve_vec=eve)
    else:
        var = np.broadcast_to(np.asarray(eve_var, dtype=float), (M,)).copy()
        if scenario.regime is Regime.EV_OUTAGE:
            cs = ChannelSet(h_direct=direct, h_eve_var=var)
        else:
            cs = ChannelSet(h_nominal=direct, h_eve_var=var)
    cs.validate_for(scenario)
    return cs


def stack_beamformers(W):
    """Real coordinate vector of a beamformer set.

    Row ``i`` of ``W`` maps to the slice ``[2*Nt*i, 2*Nt*(i+1))`` holding the
    real parts followed by the imaginary parts.
    """
    W = np.asarray(W)
    return np.concatenate([W.real, W.imag], axis=1).reshape(-1).astype(float)


def unstack_beamformers(x, M, Nt):
    """Inverse of :func:`stack_beamformers`."""
    a = np.asarray(x, dtype=float)[: 2 * M * Nt].reshape(M, 2 * Nt)
    return a[:, :Nt] + 1j * a[:, Nt:]


def beam_norms_sq(W):
    """Per-transmitter squared norms ||w_i||^2."""
    return np.sum(np.abs(W) ** 2, axis=1)


def total_power(W, scenario):
    """Total network power consumption zeta * sum ||w_i||^2 + Pc in mW."""
    return float(scenario.zeta * beam_norms_sq(W).sum() + scenario.Pc)


def min_norm_sq(W):
    """Smallest squared beamformer norm and its index (ties: smallest index).

    Returns ``(value, index)`` with a 0-based index.
    """
    norms = beam_norms_sq(W)
    idx = int(np.argmin(norms))
    return float(norms[idx]), idx


def power_feasible(W, scenario, tol=0.0):
    """True if ||w_i||^2 <= P_i * (1 + tol) for every transmitter."""
    return bool(np.all(beam_norms_sq(W) <= scenario.P * (1.0 + tol)))
