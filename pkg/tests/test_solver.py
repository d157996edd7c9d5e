import numpy as np
import pytest

from conftest import make_scenario, multistart_oracle, random_feasible_W
from secbeam.algorithms import _build_maximin_instant, AlgorithmConfig, init_mrt, \
    _interior_power
from secbeam.atoms import Affine, Expr, LogAffine, SquaredForms, affine_expr
from secbeam.errors import DomainError, InfeasibleStart
from secbeam.model import sample_channels
from secbeam.solver import SolveStatus, SubproblemModel, solve


def test_epigraph_parabola():
    # max t s.t. t <= 1 - x^2, |x| <= 1: optimum (0, 1)
    m = SubproblemModel(
        2, affine_expr([0.0, 1.0]),
        [Expr((Affine([0.0, 1.0], -1.0), SquaredForms([[1.0, 0.0]], [1.0]))),
         Expr((Affine([1.0, 0.0], -1.0),)),
         Expr((Affine([-1.0, 0.0], -1.0),))],
        np.array([0.5, 0.0]))
    out = solve(m)
    assert out.status is SolveStatus.OPTIMAL
    assert abs(out.x[0]) < 1e-3
    assert out.objective == pytest.approx(1.0, abs=1e-5)


def test_log_box():
    # max ln(1+r) s.t. r <= 3 from r = 1
    m = SubproblemModel(1, Expr((LogAffine(1.0, [1.0], 1.0),)),
                        [Expr((Affine([1.0], -3.0),))], np.array([1.0]))
    out = solve(m)
    assert out.status is SolveStatus.OPTIMAL
    assert out.objective == pytest.approx(np.log(4.0), abs=1e-5)
    assert out.feas_residual <= 1e-8


def test_infeasible_start_rejected():
    m = SubproblemModel(1, affine_expr([1.0]),
                        [Expr((Affine([1.0], -3.0),))], np.array([4.0]))
    with pytest.raises(InfeasibleStart):
        solve(m)


def test_warm_start_never_worse(rng):
    for seed in range(10):
        sc = make_scenario(M=2, Nt=2)
        ch = sample_channels(sc, 200 + seed)
        W0 = _interior_power(init_mrt(sc, ch), sc)
        model, lay = _build_maximin_instant(ch, sc, AlgorithmConfig())({"W": W0})
        out = solve(model)
        start_val = model.objective.value(model.x0)
        assert out.objective >= start_val - 1e-12
        for c in model.constraints:
            assert c.value(out.x) <= 1e-8


def test_determinism():
    sc = make_scenario(M=2, Nt=2)
    ch = sample_channels(sc, 42)
    W0 = _interior_power(init_mrt(sc, ch), sc)
    model, _ = _build_maximin_instant(ch, sc, AlgorithmConfig())({"W": W0})
    a, b = solve(model), solve(model)
    assert np.array_equal(a.x, b.x)
    assert a.objective == b.objective and a.iterations == b.iterations


def test_matches_multistart_oracle(rng):
    """Inner solves agree with a brute-force oracle on small instances."""
    misses = []
    for seed in range(20):
        sc = make_scenario(M=2, Nt=2, P=float(rng.uniform(5.0, 30.0)))
        ch = sample_channels(sc, 300 + seed)
        W0 = _interior_power(init_mrt(sc, ch), sc)
        model, _ = _build_maximin_instant(ch, sc, AlgorithmConfig())({"W": W0})
        ours = solve(model).objective
        oracle = multistart_oracle(model, rng)
        assert ours >= oracle - 1e-3, (seed, ours, oracle)
        misses.append(oracle - ours)
    assert max(misses) <= 1e-3


def test_rejects_wrong_curvature():
    convex_obj = Expr((SquaredForms([[1.0]], [1.0]),))
    with pytest.raises(ValueError):
        SubproblemModel(1, convex_obj, [], np.zeros(1))
    concave_con = Expr((SquaredForms([[1.0]], [-1.0]),))
    with pytest.raises(ValueError):
        SubproblemModel(1, affine_expr([1.0]), [concave_con], np.zeros(1))
