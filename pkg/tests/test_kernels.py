"""Backend parity: the compiled kernel must match the numpy fallback exactly
(up to float association) on models covering every atom kind."""

import numpy as np
import pytest

from secbeam.atoms import (
    Affine,
    Expr,
    LogAffine,
    QuadOverAffine,
    RecipAffine,
    RecipBilinear,
    SquaredForms,
    SqrtAffine,
)
from secbeam.kernels import BACKEND, _ref, pack_model

try:
    from secbeam.kernels import _fast
except ImportError:
    _fast = None

needs_ext = pytest.mark.skipif(_fast is None, reason="compiled kernel not built")


def _random_model(rng, n=7):
    pos = lambda: np.abs(rng.standard_normal(n)) * 0.2
    obj = Expr((
        Affine(rng.standard_normal(n), 0.4),
        SquaredForms(rng.standard_normal((2, n)), [-0.5, -0.2]),
        SqrtAffine(0.7, pos(), 3.0),
        LogAffine(1.1, pos(), 2.0),
    ), 0.2)
    cons = [
        Expr((SquaredForms(rng.standard_normal((3, n)),
                           rng.uniform(0.2, 1.0, 3)),), -25.0),
        Expr((RecipAffine(1.5, pos(), 2.0), Affine(rng.standard_normal(n) * 0.05),),
             -4.0),
        Expr((QuadOverAffine(rng.standard_normal((2, n)), [0.8, 1.2], pos(), 5.0),),
             -6.0),
        Expr((RecipBilinear(0.9, pos(), 1.0, pos(), 2.0),), -3.0),
        Expr((SqrtAffine(-0.4, pos(), 2.0), LogAffine(-0.3, pos(), 3.0)), 0.5),
    ]
    return pack_model(obj, cons, n), obj, cons


def test_reference_matches_expr_objects(rng):
    for _ in range(20):
        pm, obj, cons = _random_model(rng)
        x = rng.standard_normal(pm.n) * 0.2
        ok, F, g = _ref.eval_values(pm, x)
        assert ok
        assert F == pytest.approx(obj.value(x), rel=1e-12)
        for j, c in enumerate(cons):
            assert g[j] == pytest.approx(c.value(x), rel=1e-12)


def test_reference_barrier_matches_expr_calculus(rng):
    t = 2.3
    for _ in range(10):
        pm, obj, cons = _random_model(rng)
        x = rng.standard_normal(pm.n) * 0.1
        ok, phi, F, grad, hess = _ref.eval_barrier_full(pm, x, t)
        if not ok:
            continue
        phi_ref = -t * obj.value(x)
        grad_ref = -t * obj.grad(x)
        hess_ref = -t * obj.hess(x)
        for c in cons:
            v = c.value(x)
            gc = c.grad(x)
            phi_ref -= np.log(-v)
            grad_ref += gc / (-v)
            hess_ref += c.hess(x) / (-v) + np.outer(gc, gc) / v**2
        assert phi == pytest.approx(phi_ref, rel=1e-10)
        assert np.abs(grad - grad_ref).max() <= 1e-9 * max(1, np.abs(grad_ref).max())
        assert np.abs(hess - hess_ref).max() <= 1e-9 * max(1, np.abs(hess_ref).max())


@needs_ext
def test_backends_agree(rng):
    t = 1.7
    for trial in range(30):
        pm, obj, cons = _random_model(rng)
        x = rng.standard_normal(pm.n) * 0.25
        ok1, F1, g1 = _ref.eval_values(pm, x)
        ok2, F2, g2 = _fast.eval_values(pm, x)
        assert ok1 == ok2
        if not ok1:
            continue
        assert F1 == pytest.approx(F2, rel=1e-12, abs=1e-14)
        assert np.allclose(g1, g2, rtol=1e-12, atol=1e-14)
        v1 = _ref.eval_barrier(pm, x, t)
        v2 = _fast.eval_barrier(pm, x, t)
        assert v1[0] == v2[0]
        if v1[0]:
            assert v1[1] == pytest.approx(v2[1], rel=1e-12)
        f1 = _ref.eval_barrier_full(pm, x, t)
        f2 = _fast.eval_barrier_full(pm, x, t)
        assert f1[0] == f2[0]
        if f1[0]:
            assert f1[1] == pytest.approx(f2[1], rel=1e-12)
            assert np.allclose(f1[3], f2[3], rtol=1e-9, atol=1e-12)
            assert np.allclose(f1[4], f2[4], rtol=1e-9, atol=1e-12)


@needs_ext
def test_domain_violations_agree(rng):
    pm, obj, cons = _random_model(rng)
    # far outside every positivity domain
    x = -10.0 * np.ones(pm.n)
    assert _ref.eval_values(pm, x)[0] == _fast.eval_values(pm, x)[0] == False  # noqa: E712


def test_backend_name_exported():
    assert BACKEND in ("compiled", "python")
