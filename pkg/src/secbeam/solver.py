"""Inner convex subproblem solver (log-barrier Newton method).

Each path-following iteration produces one smooth convex program

    maximize F(x)    subject to    g_j(x) <= 0,  j = 1..m,

with a concave objective and convex constraints assembled from the atom
taxonomy, plus a strictly feasible warm start (the current iterate).  The
solver follows the central path ``min_x  -t*F(x) - sum_j ln(-g_j(x))`` for a
geometrically increasing weight ``t`` until the barrier gap ``m/t`` is below
the optimality tolerance.  All evaluations run through the kernel backend
selected in :mod:`secbeam.kernels`.

The contract the path-following layer relies on: the returned point is
feasible, never worse than the warm start, and the solve is deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .atoms import Expr
from .errors import InfeasibleStart
from .kernels import eval_barrier, eval_barrier_full, eval_values, pack_model


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class SubproblemModel:
    """One inner convex program: concave objective, convex constraints <= 0.

    ``x0`` must satisfy every constraint strictly; curvature of all
    expressions is validated on construction.
    """

    n: int
    objective: Expr
    constraints: list
    x0: np.ndarray
    names: list | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.x0.shape != (self.n,):
            raise ValueError("x0 has the wrong dimension")
        if not self.objective.is_concave():
            raise ValueError("objective must be concave")
        for j, c in enumerate(self.constraints):
            if not c.is_convex():
                name = self.names[j] if self.names else str(j)
                raise ValueError(f"constraint {name} is not convex")


@dataclass
class SolveOutcome:
    x: np.ndarray
    objective: float
    feas_residual: float
    optimality: float
    iterations: int
    status: SolveStatus


def _newton_direction(H, grad):
    """Solve H d = -grad with an escalating ridge until d is non-ascent.

    A zero direction (already centered) is valid; the caller's decrement
    test turns it into stage convergence.
    """
    n = H.shape[0]
    ridge = 0.0
    scale = max(1.0, float(np.trace(H)) / n)
    for _ in range(14):
        try:
            d = np.linalg.solve(H + ridge * np.eye(n), -grad)
        except np.linalg.LinAlgError:
            d = None
        if d is not None and np.all(np.isfinite(d)) and float(grad @ d) <= 0.0:
            return d
        ridge = 1e-12 * scale if ridge == 0.0 else ridge * 100.0
    return None


def solve(model, feas_tol=1e-8, opt_tol=1e-6, max_iter=500):
    """Solve an inner convex program from its strictly feasible warm start.

    Raises :class:`InfeasibleStart` if the warm start violates a constraint;
    on numerical breakdown the warm start itself is returned with status
    ``NUMERICAL_FAILURE`` so the outer loop can stop at its last iterate.
    """
    pm = pack_model(model.objective, model.constraints, model.n)
    x0 = model.x0.copy()
    ok, F0, g0 = eval_values(pm, x0)
    if not ok or (pm.m and g0.max() >= 0.0):
        worst = "domain violation" if not ok else f"max constraint {g0.max():.3e}"
        raise InfeasibleStart(f"warm start is not strictly feasible ({worst})")

    x = x0.copy()
    scale = max(1.0, abs(F0))
    t = max(1.0, pm.m / scale)
    mu = 20.0
    iters = 0
    status = SolveStatus.OPTIMAL
    gap = pm.m / t
    eps = np.finfo(float).eps

    for _stage in range(60):
        # centering: Newton on phi(x) = -t F(x) - sum ln(-g(x))
        for _ in range(100):
            full = eval_barrier_full(pm, x, t)
            if not full[0]:
                status = SolveStatus.NUMERICAL_FAILURE
                break
            _, phi, F, grad, hess = full
            d = _newton_direction(hess, grad)
            if d is None:
                status = SolveStatus.NUMERICAL_FAILURE
                break
            gd = float(grad @ d)
            if -gd / 2.0 <= max(1e-10, 10.0 * eps * abs(phi)):
                break
            alpha = 1.0
            accepted = False
            for _ls in range(60):
                ok2, phi2, _ = eval_barrier(pm, x + alpha * d, t)
                if ok2 and phi2 <= phi + 1e-4 * alpha * gd + 4.0 * eps * abs(phi):
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break  # step below float resolution; stage is done
            x = x + alpha * d
            iters += 1
            if iters >= max_iter:
                break
        if status is SolveStatus.NUMERICAL_FAILURE:
            break
        okv, F, g = eval_values(pm, x)
        gap = pm.m / t
        if gap <= opt_tol * max(1.0, abs(F)):
            break
        if iters >= max_iter:
            status = SolveStatus.MAX_ITERATIONS
            break
        t *= mu

    okv, F, g = eval_values(pm, x)
    if not okv or (pm.m and g.max() >= 0.0) or F < F0 - 1e-12:
        # never hand a worse or infeasible point back to the outer loop
        return SolveOutcome(x0, F0, max(0.0, g0.max()) if pm.m else 0.0,
                            gap, iters, SolveStatus.NUMERICAL_FAILURE)
    feas = max(0.0, float(g.max())) if pm.m else 0.0
    return SolveOutcome(x, float(F), feas, gap, iters, status)
