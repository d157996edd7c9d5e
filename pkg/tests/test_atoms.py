import numpy as np
import pytest

from conftest import fd_gradient
from secbeam.atoms import (
    Affine,
    Expr,
    Layout,
    LogAffine,
    QuadOverAffine,
    RecipAffine,
    RecipBilinear,
    SquaredForms,
    SqrtAffine,
)
from secbeam.errors import DomainError

N = 5


def _random_atoms(rng, n=N):
    """One instance of every atom kind, with domains containing the origin."""
    pos = lambda: np.abs(rng.standard_normal(n)) * 0.2
    return [
        Affine(rng.standard_normal(n), 0.3),
        SquaredForms(rng.standard_normal((3, n)), rng.uniform(0.2, 2.0, 3)),
        RecipAffine(1.7, pos(), 2.0),
        QuadOverAffine(rng.standard_normal((2, n)), [1.0, 0.5], pos(), 3.0),
        RecipBilinear(0.8, pos(), 1.5, pos(), 2.5),
        SqrtAffine(1.1, pos(), 4.0),
        LogAffine(0.6, pos(), 2.0),
    ]


def test_gradients_match_finite_differences(rng):
    for trial in range(30):
        atoms = _random_atoms(rng)
        x = rng.standard_normal(N) * 0.3
        for atom in atoms:
            g = atom.grad(x)
            g_fd = fd_gradient(atom.value, x)
            assert np.abs(g - g_fd).max() <= 1e-5 * max(1.0, np.abs(g_fd).max()), \
                atom.kind


def test_hessians_match_finite_differences(rng):
    for trial in range(10):
        atoms = _random_atoms(rng)
        x = rng.standard_normal(N) * 0.3
        for atom in atoms:
            H = atom.hess(x)
            assert np.allclose(H, H.T)
            for k in range(N):
                col_fd = fd_gradient(lambda z: atom.grad(z)[k], x, h=1e-5)
                assert np.abs(H[k] - col_fd).max() <= 1e-4 * max(1.0, np.abs(H[k]).max()), \
                    atom.kind


def test_midpoint_convexity(rng):
    """Random midpoint checks of each atom's declared curvature."""
    checks = {k: 0 for k in ("squared-norm", "reciprocal-of-affine",
                             "quadratic-over-affine", "reciprocal-of-bilinear",
                             "sqrt-of-scalar", "log1p-of-scalar")}
    while min(checks.values()) < 1000:
        atoms = _random_atoms(rng)[1:]
        x1 = rng.standard_normal(N) * 0.3
        x2 = rng.standard_normal(N) * 0.3
        mid = 0.5 * (x1 + x2)
        for atom in atoms:
            try:
                vm, v1, v2 = atom.value(mid), atom.value(x1), atom.value(x2)
            except DomainError:
                continue
            tol = 1e-10 * max(1.0, abs(v1), abs(v2))
            if atom.curvature == "convex":
                assert vm <= 0.5 * (v1 + v2) + tol, atom.kind
            elif atom.curvature == "concave":
                assert vm >= 0.5 * (v1 + v2) - tol, atom.kind
            checks[atom.kind] += 1


def test_curvature_flips_with_sign():
    a = np.ones(N)
    assert RecipAffine(1.0, a, 2.0).curvature == "convex"
    assert RecipAffine(-1.0, a, 2.0).curvature == "concave"
    assert SqrtAffine(1.0, a, 2.0).curvature == "concave"
    assert SqrtAffine(-1.0, a, 2.0).curvature == "convex"
    assert SquaredForms([a], [-1.0]).curvature == "concave"
    assert LogAffine(2.0, a, 2.0).curvature == "concave"
    assert Affine(a).curvature == "affine"


def test_domain_guards():
    a = np.ones(N)
    x_bad = -np.ones(N)
    for atom in (RecipAffine(1.0, a, 0.0), SqrtAffine(1.0, a, 0.0),
                 LogAffine(1.0, a, 0.0),
                 QuadOverAffine([a], [1.0], a, 0.0),
                 RecipBilinear(1.0, a, 0.0, a, 0.0)):
        with pytest.raises(DomainError):
            atom.value(x_bad)


def test_expr_algebra(rng):
    atoms = _random_atoms(rng)
    e1 = Expr((atoms[0], atoms[1]), 0.5)
    e2 = Expr((atoms[2],), -0.25)
    x = rng.standard_normal(N) * 0.1
    assert (e1 + e2).value(x) == pytest.approx(e1.value(x) + e2.value(x))
    assert (e1 - e2).value(x) == pytest.approx(e1.value(x) - e2.value(x))
    assert (2.5 * e1).value(x) == pytest.approx(2.5 * e1.value(x))
    assert (-e1).value(x) == pytest.approx(-e1.value(x))
    assert np.allclose((e1 + e2).grad(x), e1.grad(x) + e2.grad(x))
    assert (e1 + 1.0).value(x) == pytest.approx(e1.value(x) + 1.0)


def test_expr_curvature_labels(rng):
    conv = Expr((SquaredForms(np.ones((1, N)), [1.0]),))
    conc = Expr((SquaredForms(np.ones((1, N)), [-1.0]),))
    aff = Expr((Affine(np.ones(N)),))
    assert conv.is_convex() and not conv.is_concave()
    assert conc.is_concave() and not conc.is_convex()
    assert aff.is_convex() and aff.is_concave()
    assert (conv + conc).curvature() == "indefinite"


class TestLayout:
    def test_indexing(self):
        lay = Layout(M=2, Nt=3, with_r=True, with_R=True, epigraph=True)
        assert lay.n == 2 * 2 * 3 + 2 + 2 + 1
        assert lay.w_slice(1) == slice(6, 12)
        assert lay.r_index(1) == 13
        assert lay.R_index(0) == 14
        assert lay.t_index == 16
        with pytest.raises(ValueError):
            Layout(2, 3).r_index(0)

    def test_channel_rows(self, rng):
        lay = Layout(M=2, Nt=4)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        W = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        x = lay.stack(W)
        re, im = lay.chan_rows(h, 1)
        z = np.vdot(h, W[1])
        assert re @ x == pytest.approx(z.real)
        assert im @ x == pytest.approx(z.imag)
        rows = lay.gain_rows(h, 1)
        assert (rows @ x) @ (rows @ x) == pytest.approx(abs(z) ** 2)

    def test_linearized_gain_and_inner(self, rng):
        lay = Layout(M=2, Nt=4)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        Wk = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        W = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        x = lay.stack(W)
        a = lay.linearized_gain(h, Wk[0], 0)
        expect = 2.0 * np.real(np.vdot(Wk[0], h) * np.vdot(h, W[0]))
        assert a @ x == pytest.approx(expect)
        b = lay.inner_row(Wk[1], 1)
        assert b @ x == pytest.approx(2.0 * np.real(np.vdot(Wk[1], W[1])))

    def test_stack_split_roundtrip(self, rng):
        lay = Layout(M=3, Nt=2, with_r=True, with_R=True, epigraph=True)
        W = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        r = rng.uniform(0.1, 1.0, 3)
        R = rng.uniform(0.1, 1.0, 3)
        x = lay.stack(W, r=r, R=R, t=0.7)
        W2, r2, R2, t2 = lay.split(x)
        assert np.allclose(W2, W) and np.allclose(r2, r)
        assert np.allclose(R2, R) and t2 == pytest.approx(0.7)
