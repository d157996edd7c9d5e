"""Evaluable convex/concave atoms over a real coordinate vector.

Every objective term and constraint of the inner convex subproblems is a sum
of atoms from a fixed taxonomy (affine, weighted squared forms, reciprocal of
an affine form, quadratic-over-affine, reciprocal of a bilinear product,
square root and logarithm of affine forms).  Each atom knows its value,
gradient, Hessian and curvature sign; the reference implementations here are
used by the tests and by the model packer, while the hot evaluation path
lives in :mod:`secbeam.kernels`.

Beamformers embed into the coordinate vector through :class:`Layout`: block
``i`` holds Re(w_i) then Im(w_i), followed by optional per-user scalars
``r_i`` and ``R_i`` and an optional epigraph scalar ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


class Layout:
    """Index map of one subproblem's real coordinate vector."""

    def __init__(self, M, Nt, with_r=False, with_R=False, epigraph=False):
        self.M = M
        self.Nt = Nt
        self.with_r = with_r
        self.with_R = with_R
        self.epigraph = epigraph
        n = 2 * M * Nt
        self._r0 = n
        if with_r:
            n += M
        self._R0 = n
        if with_R:
            n += M
        self._t = n
        if epigraph:
            n += 1
        self.n = n

    def w_slice(self, i):
        return slice(2 * self.Nt * i, 2 * self.Nt * (i + 1))

    def r_index(self, i):
        if not self.with_r:
            raise ValueError("layout has no r variables")
        return self._r0 + i

    def R_index(self, i):
        if not self.with_R:
            raise ValueError("layout has no R variables")
        return self._R0 + i

    @property
    def t_index(self):
        if not self.epigraph:
            raise ValueError("layout has no epigraph variable")
        return self._t

    def unit(self, idx):
        e = np.zeros(self.n)
        e[idx] = 1.0
        return e

    def chan_rows(self, h, i):
        """Rows (re, im) with re@x = Re(h^H w_i) and im@x = Im(h^H w_i)."""
        Nt = self.Nt
        re = np.zeros(self.n)
        im = np.zeros(self.n)
        sl = self.w_slice(i)
        re[sl] = np.concatenate([h.real, h.imag])
        im[sl] = np.concatenate([-h.imag, h.real])
        return re, im

    def gain_rows(self, h, i):
        """Rows of the squared gain |h^H w_i|^2 (two unit-weight squares)."""
        re, im = self.chan_rows(h, i)
        return np.stack([re, im])

    def linearized_gain(self, h, wk_i, i):
        """Affine row of 2 Re{(w_i^k)^H h h^H w_i} for expansion point wk_i."""
        z = np.vdot(h, wk_i)  # h^H w^k
        re, im = self.chan_rows(h, i)
        return 2.0 * (z.real * re + z.imag * im)

    def norm_rows(self, i):
        """Rows of ||w_i||^2 (one unit-weight square per real coordinate)."""
        sl = self.w_slice(i)
        rows = np.zeros((2 * self.Nt, self.n))
        rows[:, sl] = np.eye(2 * self.Nt)
        return rows

    def inner_row(self, wk_j, j):
        """Affine row of 2 Re{(w_j^k)^H w_j}."""
        a = np.zeros(self.n)
        a[self.w_slice(j)] = 2.0 * np.concatenate([wk_j.real, wk_j.imag])
        return a

    def stack(self, W, r=None, R=None, t=None):
        """Assemble a coordinate vector from parts."""
        from .model import stack_beamformers

        x = np.zeros(self.n)
        x[: 2 * self.M * self.Nt] = stack_beamformers(W)
        if self.with_r:
            x[self._r0:self._r0 + self.M] = np.asarray(r, dtype=float)
        if self.with_R:
            x[self._R0:self._R0 + self.M] = np.asarray(R, dtype=float)
        if self.epigraph:
            x[self._t] = 0.0 if t is None else float(t)
        return x

    def split(self, x):
        """Inverse of :meth:`stack`, returning (W, r, R, t)."""
        from .model import unstack_beamformers

        W = unstack_beamformers(x, self.M, self.Nt)
        r = x[self._r0:self._r0 + self.M].copy() if self.with_r else None
        R = x[self._R0:self._R0 + self.M].copy() if self.with_R else None
        t = float(x[self._t]) if self.epigraph else None
        return W, r, R, t


# curvature labels
AFFINE, CONVEX, CONCAVE = "affine", "convex", "concave"


class Affine:
    """a @ x + c."""

    kind = "affine"
    __slots__ = ("a", "c")

    def __init__(self, a, c=0.0):
        self.a = np.asarray(a, dtype=float)
        self.c = float(c)

    def value(self, x):
        return float(self.a @ x) + self.c

    def grad(self, x):
        return self.a.copy()

    def hess(self, x):
        return np.zeros((self.a.size, self.a.size))

    def scaled(self, k):
        return Affine(k * self.a, k * self.c)

    @property
    def curvature(self):
        return AFFINE


class SquaredForms:
    """sum_k weight_k * (rows_k @ x)^2; convex for nonnegative weights."""

    kind = "squared-norm"
    __slots__ = ("rows", "w")

    def __init__(self, rows, w):
        self.rows = np.atleast_2d(np.asarray(rows, dtype=float))
        self.w = np.atleast_1d(np.asarray(w, dtype=float))
        if self.w.size == 1 and self.rows.shape[0] > 1:
            self.w = np.full(self.rows.shape[0], float(self.w[0]))
        if self.rows.shape[0] != self.w.size:
            raise ValueError("one weight per row required")

    def value(self, x):
        y = self.rows @ x
        return float(self.w @ (y * y))

    def grad(self, x):
        y = self.rows @ x
        return 2.0 * self.rows.T @ (self.w * y)

    def hess(self, x):
        return 2.0 * (self.rows.T * self.w) @ self.rows

    def scaled(self, k):
        return SquaredForms(self.rows, k * self.w)

    @property
    def curvature(self):
        if np.all(self.w >= 0):
            return CONVEX
        if np.all(self.w <= 0):
            return CONCAVE
        raise ValueError("mixed-sign squared forms have no curvature label")


class RecipAffine:
    """c0 / (a @ x + c) on the domain a @ x + c > 0."""

    kind = "reciprocal-of-affine"
    __slots__ = ("c0", "a", "c")

    def __init__(self, c0, a, c=0.0):
        self.c0 = float(c0)
        self.a = np.asarray(a, dtype=float)
        self.c = float(c)

    def _den(self, x):
        u = float(self.a @ x) + self.c
        if u <= 0.0:
            raise DomainError("reciprocal-of-affine evaluated at nonpositive denominator")
        return u

    def value(self, x):
        return self.c0 / self._den(x)

    def grad(self, x):
        u = self._den(x)
        return (-self.c0 / u**2) * self.a

    def hess(self, x):
        u = self._den(x)
        return (2.0 * self.c0 / u**3) * np.outer(self.a, self.a)

    def scaled(self, k):
        return RecipAffine(k * self.c0, self.a, self.c)

    @property
    def curvature(self):
        return CONVEX if self.c0 >= 0 else CONCAVE


class QuadOverAffine:
    """[sum_k w_k (rows_k @ x)^2] / (b @ x + cb) on b @ x + cb > 0.

    Jointly convex for nonnegative weights (matrix-fractional composition
    with affine maps).
    """

    kind = "quadratic-over-affine"
    __slots__ = ("rows", "w", "b", "cb")

    def __init__(self, rows, w, b, cb=0.0):
        self.rows = np.atleast_2d(np.asarray(rows, dtype=float))
        self.w = np.atleast_1d(np.asarray(w, dtype=float))
        if self.w.size == 1 and self.rows.shape[0] > 1:
            self.w = np.full(self.rows.shape[0], float(self.w[0]))
        self.b = np.asarray(b, dtype=float)
        self.cb = float(cb)

    def _den(self, x):
        u = float(self.b @ x) + self.cb
        if u <= 0.0:
            raise DomainError("quadratic-over-affine evaluated at nonpositive denominator")
        return u

    def value(self, x):
        y = self.rows @ x
        return float(self.w @ (y * y)) / self._den(x)

    def grad(self, x):
        u = self._den(x)
        y = self.rows @ x
        q = float(self.w @ (y * y))
        p = 2.0 * self.rows.T @ (self.w * y)
        return p / u - (q / u**2) * self.b

    def hess(self, x):
        u = self._den(x)
        y = self.rows @ x
        q = float(self.w @ (y * y))
        p = 2.0 * self.rows.T @ (self.w * y)
        H = (2.0 / u) * (self.rows.T * self.w) @ self.rows
        H -= (np.outer(p, self.b) + np.outer(self.b, p)) / u**2
        H += (2.0 * q / u**3) * np.outer(self.b, self.b)
        return H

    def scaled(self, k):
        return QuadOverAffine(self.rows, k * self.w, self.b, self.cb)

    @property
    def curvature(self):
        if np.all(self.w >= 0):
            return CONVEX
        if np.all(self.w <= 0):
            return CONCAVE
        raise ValueError("mixed-sign quadratic-over-affine has no curvature label")


class RecipBilinear:
    """c0 / ((a @ x + ca) * (b @ x + cb)) with both factors positive.

    1/(uv) is jointly convex on u, v > 0.
    """

    kind = "reciprocal-of-bilinear"
    __slots__ = ("c0", "a", "ca", "b", "cb")

    def __init__(self, c0, a, ca, b, cb):
        self.c0 = float(c0)
        self.a = np.asarray(a, dtype=float)
        self.ca = float(ca)
        self.b = np.asarray(b, dtype=float)
        self.cb = float(cb)

    def _factors(self, x):
        u = float(self.a @ x) + self.ca
        v = float(self.b @ x) + self.cb
        if u <= 0.0 or v <= 0.0:
            raise DomainError("reciprocal-of-bilinear evaluated outside u, v > 0")
        return u, v

    def value(self, x):
        u, v = self._factors(x)
        return self.c0 / (u * v)

    def grad(self, x):
        u, v = self._factors(x)
        return -self.c0 / (u * v) * (self.a / u + self.b / v)

    def hess(self, x):
        u, v = self._factors(x)
        k = self.c0 / (u * v)
        aa = np.outer(self.a, self.a)
        bb = np.outer(self.b, self.b)
        ab = np.outer(self.a, self.b)
        return k * (2.0 * aa / u**2 + 2.0 * bb / v**2 + (ab + ab.T) / (u * v))

    def scaled(self, k):
        return RecipBilinear(k * self.c0, self.a, self.ca, self.b, self.cb)

    @property
    def curvature(self):
        return CONVEX if self.c0 >= 0 else CONCAVE


class SqrtAffine:
    """c0 * sqrt(a @ x + c) on a @ x + c > 0; concave for c0 >= 0."""

    kind = "sqrt-of-scalar"
    __slots__ = ("c0", "a", "c")

    def __init__(self, c0, a, c=0.0):
        self.c0 = float(c0)
        self.a = np.asarray(a, dtype=float)
        self.c = float(c)

    def _arg(self, x):
        u = float(self.a @ x) + self.c
        if u <= 0.0:
            raise DomainError("sqrt evaluated at nonpositive argument")
        return u

    def value(self, x):
        return self.c0 * math.sqrt(self._arg(x))

    def grad(self, x):
        u = self._arg(x)
        return (0.5 * self.c0 / math.sqrt(u)) * self.a

    def hess(self, x):
        u = self._arg(x)
        return (-0.25 * self.c0 * u**-1.5) * np.outer(self.a, self.a)

    def scaled(self, k):
        return SqrtAffine(k * self.c0, self.a, self.c)

    @property
    def curvature(self):
        return CONCAVE if self.c0 >= 0 else CONVEX


class LogAffine:
    """c0 * ln(a @ x + c) on a @ x + c > 0; concave for c0 >= 0.

    The log1p-of-scalar atom is this with the shift folded into ``c``.
    """

    kind = "log1p-of-scalar"
    __slots__ = ("c0", "a", "c")

    def __init__(self, c0, a, c=0.0):
        self.c0 = float(c0)
        self.a = np.asarray(a, dtype=float)
        self.c = float(c)

    def _arg(self, x):
        u = float(self.a @ x) + self.c
        if u <= 0.0:
            raise DomainError("log evaluated at nonpositive argument")
        return u

    def value(self, x):
        return self.c0 * math.log(self._arg(x))

    def grad(self, x):
        return (self.c0 / self._arg(x)) * self.a

    def hess(self, x):
        u = self._arg(x)
        return (-self.c0 / u**2) * np.outer(self.a, self.a)

    def scaled(self, k):
        return LogAffine(k * self.c0, self.a, self.c)

    @property
    def curvature(self):
        return CONCAVE if self.c0 >= 0 else CONVEX


@dataclass(frozen=True)
class Expr:
    """Sum of atoms plus a constant; the unit the solver works with."""

    atoms: tuple = ()
    const: float = 0.0

    def value(self, x):
        return self.const + sum(a.value(x) for a in self.atoms)

    def grad(self, x):
        g = np.zeros(len(x))
        for a in self.atoms:
            g += a.grad(x)
        return g

    def hess(self, x):
        H = np.zeros((len(x), len(x)))
        for a in self.atoms:
            H += a.hess(x)
        return H

    def scaled(self, k):
        return Expr(tuple(a.scaled(k) for a in self.atoms), k * self.const)

    def __add__(self, other):
        if isinstance(other, Expr):
            return Expr(self.atoms + other.atoms, self.const + other.const)
        return Expr(self.atoms, self.const + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Expr):
            return self + other.scaled(-1.0)
        return Expr(self.atoms, self.const - float(other))

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, k):
        return self.scaled(float(k))

    __rmul__ = __mul__

    def curvature(self):
        """'affine', 'convex', 'concave' or 'indefinite' over the atom sum."""
        labels = {a.curvature for a in self.atoms}
        labels.discard(AFFINE)
        if not labels:
            return AFFINE
        if labels == {CONVEX}:
            return CONVEX
        if labels == {CONCAVE}:
            return CONCAVE
        return "indefinite"

    def is_convex(self):
        return self.curvature() in (AFFINE, CONVEX)

    def is_concave(self):
        return self.curvature() in (AFFINE, CONCAVE)


def affine_expr(a, c=0.0):
    return Expr((Affine(a, c),))


def const_expr(c):
    return Expr((), float(c))
