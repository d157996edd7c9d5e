"""Shared fixtures and independent scalar oracles for the test suite.

The oracle functions re-derive the rate formulas with explicit loops over
vector components and python complex arithmetic, independent of the library
implementation they are checked against.
"""

import cmath
import math

import numpy as np
import pytest

from secbeam.model import Regime, Scenario, sample_channels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_scenario(M=2, Nt=4, P=20.0, regime=Regime.PERFECT_CSI, **kw):
    return Scenario.default(M=M, Nt=Nt, P=P, regime=regime, **kw)


def random_feasible_W(scenario, rng, fill=0.8):
    """Random beamformers with ||w_i||^2 = fill * P_i."""
    M, Nt = scenario.M, scenario.Nt
    W = rng.standard_normal((M, Nt)) + 1j * rng.standard_normal((M, Nt))
    norms = np.sqrt(np.sum(np.abs(W) ** 2, axis=1))
    return W * (np.sqrt(fill * scenario.P) / norms)[:, None]


def oracle_inner(h, w):
    """h^H w by explicit component loop."""
    acc = 0j
    for k in range(len(h)):
        acc += h[k].conjugate() * w[k]
    return acc


def oracle_user_rate(W, h_direct, sigma_u, i):
    """ln(1 + |h_ii^H w_i|^2 / (sum_{j!=i} |h_ji^H w_j|^2 + sigma_i^2))."""
    M = W.shape[0]
    sig = abs(oracle_inner(h_direct[i][i], W[i])) ** 2
    den = sigma_u[i]
    for j in range(M):
        if j != i:
            den += abs(oracle_inner(h_direct[j][i], W[j])) ** 2
    return math.log(1.0 + sig / den)


def oracle_eve_rate(W, h_eve, sigma_e, i):
    """ln(1 + |h_ie^H w_i|^2 / (sum_{j!=i} |h_je^H w_j|^2 + sigma_e^2))."""
    M = W.shape[0]
    sig = abs(oracle_inner(h_eve[i], W[i])) ** 2
    den = sigma_e
    for j in range(M):
        if j != i:
            den += abs(oracle_inner(h_eve[j], W[j])) ** 2
    return math.log(1.0 + sig / den)


def oracle_sinr_margin(W, h, sigma_i, delta, i, R):
    """|h_ii^H w_i|^2 / R - [(1-delta)^{-1} interference + sigma_i^2]."""
    M = W.shape[0]
    interf = 0.0
    for j in range(M):
        if j != i:
            interf += abs(oracle_inner(h[j][i], W[j])) ** 2
    return abs(oracle_inner(h[i][i], W[i])) ** 2 / R - (
        interf / (1.0 - delta) + sigma_i)


def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient."""
    g = np.zeros(len(x))
    for k in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        g[k] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def multistart_oracle(model, rng, n_starts=8):
    """Brute-force inner-problem oracle: random-multistart SLSQP polish.

    Independent of the barrier solver; used to certify inner solve quality.
    """
    from scipy import optimize

    from secbeam.errors import DomainError

    def neg_obj(x):
        try:
            return -model.objective.value(x)
        except DomainError:
            return 1e9

    def neg_obj_grad(x):
        try:
            return -model.objective.grad(x)
        except DomainError:
            return np.zeros_like(x)

    cons = []
    for c in model.constraints:
        def fun(x, c=c):
            try:
                return -c.value(x)
            except DomainError:
                return -1e9

        def jac(x, c=c):
            try:
                return -c.grad(x)
            except DomainError:
                return np.zeros_like(x)

        cons.append({"type": "ineq", "fun": fun, "jac": jac})

    best = -np.inf
    starts = [model.x0]
    for _ in range(n_starts):
        starts.append(model.x0 + 0.3 * rng.standard_normal(model.n))
    for x0 in starts:
        res = optimize.minimize(neg_obj, x0, jac=neg_obj_grad, method="SLSQP",
                                constraints=cons,
                                options={"maxiter": 300, "ftol": 1e-12})
        x = res.x
        try:
            feas = max(c.value(x) for c in model.constraints)
            val = model.objective.value(x)
        except DomainError:
            continue
        if feas <= 1e-7 and val > best:
            best = val
    return best
