"""Closed-form outage bounds for SINRs with weighted-exponential interference.

The random quantity throughout is ``S = sum_i ||w_i||^2 p_i`` with ``p_i``
i.i.d. unit-mean exponentials, arising from ``|<chi_i, w_i>|^2`` for
``chi_i ~ CN(0, I)``.  The outage event of the ratio ``a / (delta*S + b)``
falling below a rate threshold ``r`` is two-sided bounded by Erlang survival
functions evaluated with the extreme squared norms; replacing all norms by
the minimum (maximum) can only increase (decrease) the interference sum.

Also provided: the Cauchy (AM-GM) relaxation of the lower bound that yields
a scalar threshold equation in ``r``, the Bernstein-type certified rate used
for conservativeness comparisons, and a Monte-Carlo estimation oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_ERLANG_EXACT_LIMIT = 20


@dataclass(frozen=True)
class OutageQuery:
    """Inputs of one outage-probability evaluation.

    ``a`` is the signal numerator, ``b`` the deterministic denominator part,
    ``r`` the SINR threshold, ``delta`` the interference scale and ``norms``
    the squared beamformer norms weighting the exponentials.  The outage
    probability is nonzero iff ``r < a / b``.
    """

    a: float
    b: float
    r: float
    delta: float
    norms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "norms", np.atleast_1d(np.asarray(self.norms, float)))
        if self.a <= 0 or self.b <= 0 or self.r <= 0 or self.delta <= 0:
            raise ValueError("a, b, r and delta must be positive")
        if self.norms.ndim != 1 or self.norms.size < 1 or np.any(self.norms <= 0):
            raise ValueError("norms must be a nonempty vector of positive values")


def gamma_int(i):
    """Gamma(i) = (i-1)! for integer i >= 1, via log-space for large i."""
    if i < 1 or int(i) != i:
        raise ValueError("gamma_int expects an integer i >= 1")
    i = int(i)
    if i <= _ERLANG_EXACT_LIMIT:
        return float(math.factorial(i - 1))
    return math.exp(math.lgamma(i))


def log_gamma_int(i):
    """log Gamma(i) = log (i-1)!."""
    if i < 1 or int(i) != i:
        raise ValueError("log_gamma_int expects an integer i >= 1")
    return math.lgamma(int(i))


def erlang_survival(y, M):
    """P(Gamma(M, 1) > y) = exp(-y) * sum_{i=1..M} y^(i-1) / Gamma(i).

    Evaluated in log-space with a log-sum-exp to avoid overflow of the
    power terms for large M or y.
    """
    if y < 0:
        raise ValueError("y must be nonnegative")
    if y == 0.0:
        return 1.0
    logy = math.log(y)
    terms = [-y + (i - 1) * logy - math.lgamma(i) for i in range(1, M + 1)]
    peak = max(terms)
    total = sum(math.exp(t - peak) for t in terms)
    return float(min(1.0, math.exp(peak) * total))


def _threshold_arg(q):
    """(a/r - b), the deterministic interference headroom; <= 0 means sure outage."""
    return q.a / q.r - q.b


def outage_lower(q):
    """Lower bound of Prob(a / (delta*S + b) < r); equals the upper bound at M=1.

    Queries with ``r >= a/b`` (no deterministic headroom, so no certifiable
    rate statement exists) return 0 by convention, so optimizers probing the
    boundary get a continuation rather than an error.  The same convention
    is applied by :func:`outage_upper` and :func:`mc_outage`.
    """
    c = _threshold_arg(q)
    if c <= 0:
        return 0.0
    return erlang_survival(c / (q.delta * float(q.norms.min())), q.norms.size)


def outage_upper(q):
    """Upper bound of Prob(a / (delta*S + b) < r)."""
    c = _threshold_arg(q)
    if c <= 0:
        return 0.0
    return erlang_survival(c / (q.delta * float(q.norms.max())), q.norms.size)


def mc_outage(q, n_samples, seed):
    """Monte-Carlo estimate of Prob(a / (delta*S + b) < r).

    Returns ``(estimate, std_error)`` with the binomial standard error.
    Degenerate queries (``r >= a/b``) return (0.0, 0.0), matching the
    convention of the closed-form bounds.
    """
    if n_samples < 10**3:
        raise ValueError("use at least 1000 samples")
    if _threshold_arg(q) <= 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    p = rng.exponential(1.0, size=(n_samples, q.norms.size))
    sinr = q.a / (q.delta * (p @ q.norms) + q.b)
    hits = np.count_nonzero(sinr < q.r)
    est = hits / n_samples
    se = math.sqrt(max(est * (1.0 - est), 1.0 / n_samples) / n_samples)
    return est, se


def threshold_gap(a, b, r, delta, eps, norms):
    """Value of the Cauchy-relaxed admissibility constraint at rate ``r``.

    Nonpositivity of this function defines the certified rate region
    obtained from the lower outage bound after the AM-GM step:

        -(a/r - b)/s + delta*(M-1)/2 * (ln(a/r - b) - ln s)
            - delta*(ln eps - ln M + (1/M) sum ln Gamma(i) + (M-1)/2 ln delta)

    with ``s`` the smallest squared norm.  Raises DomainError when
    ``a/r - b <= 0``.
    """
    norms = np.atleast_1d(np.asarray(norms, float))
    M = norms.size
    c = a / r - b
    if c <= 0:
        raise DomainError("threshold_gap requires a/r - b > 0")
    s = float(norms.min())
    mean_lgamma = sum(math.lgamma(i) for i in range(1, M + 1)) / M
    const = math.log(eps) - math.log(M) + mean_lgamma + 0.5 * (M - 1) * math.log(delta)
    return -c / s + delta * 0.5 * (M - 1) * (math.log(c) - math.log(s)) - delta * const


def threshold_rate(a, b, delta, eps, norms, eps_b=1e-12):
    """Largest certified rate on the increasing branch of the threshold gap.

    The gap function rises from -inf as r grows from 0, peaks where
    ``a/r - b = delta * s * (M-1)/2`` and falls again; the certified rate is
    the first crossing of zero, located by bisection with the one-sided rule
    ``-eps_b <= gap <= 0``.  For M=1 this is ``a / (b + delta*s*ln(1/eps))``
    in closed form.
    """
    from .rootfind import Bracket, bisect_lower

    norms = np.atleast_1d(np.asarray(norms, float))
    M = norms.size
    s = float(norms.min())
    if M == 1:
        return a / (b + delta * s * math.log(1.0 / eps))

    def gap(r):
        try:
            return threshold_gap(a, b, r, delta, eps, norms)
        except DomainError:
            return math.inf

    r_peak = a / (b + delta * s * 0.5 * (M - 1))
    lo = r_peak
    for _ in range(200):
        lo *= 0.5
        if gap(lo) < 0:
            break
    else:
        raise DomainError("could not find a negative gap value near r = 0")
    return bisect_lower(gap, Bracket(lo, r_peak, gap(lo), gap(r_peak)), eps_b)


def bernstein_rate(norms, a, b, delta, eps):
    """Bernstein-type certified rate for the same outage event.

    r = a / (b + delta*(sum s_i + 2*sqrt(sum s_i^2)*sqrt(ln 1/eps)
                        + 2*max_i s_i * ln 1/eps))
    with s_i the squared norms.
    """
    norms = np.atleast_1d(np.asarray(norms, float))
    if np.any(norms <= 0) or a <= 0 or b <= 0 or delta <= 0 or not 0 < eps < 1:
        raise ValueError("bernstein_rate expects positive inputs and eps in (0,1)")
    le = math.log(1.0 / eps)
    pen = norms.sum() + 2.0 * math.sqrt(float(np.sum(norms**2))) * math.sqrt(le) \
        + 2.0 * float(norms.max()) * le
    return a / (b + delta * pen)


def partial_fraction_identity(x, M):
    """Both sides of 1/(x*(1+x)^M) = 1/x - sum_{i=1..M} 1/(1+x)^i."""
    if x <= 0:
        raise ValueError("x must be positive")
    lhs = 1.0 / (x * (1.0 + x) ** M)
    rhs = 1.0 / x - sum((1.0 + x) ** (-i) for i in range(1, M + 1))
    return lhs, rhs
