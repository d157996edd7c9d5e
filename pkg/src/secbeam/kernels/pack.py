"""Flattening of atom expressions into array form for the evaluation kernels.

Every affine form appearing in any atom becomes one row of a shared matrix
``L``; a single ``y = L @ x`` then feeds all atom evaluations.  Atoms are
stored as structure-of-arrays per kind so both the compiled kernel and the
numpy fallback can sweep them without touching Python objects.

Target convention: ``-1`` means the objective, ``j >= 0`` constraint ``j``
(constraints are expressions required ``<= 0``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import atoms as at


@dataclass
class PackedModel:
    n: int
    m: int
    L: np.ndarray
    obj_const: float
    con_const: np.ndarray
    # merged affine terms: value y[row]
    aff_row: np.ndarray
    aff_tgt: np.ndarray
    # squared forms: w * y[row]^2
    q_row: np.ndarray
    q_w: np.ndarray
    q_tgt: np.ndarray
    # reciprocal of affine: c0 / (y[row] + cu)
    ra_row: np.ndarray
    ra_c0: np.ndarray
    ra_cu: np.ndarray
    ra_tgt: np.ndarray
    # quadratic-over-affine groups and their numerator rows
    qg_brow: np.ndarray
    qg_cb: np.ndarray
    qg_tgt: np.ndarray
    qn_row: np.ndarray
    qn_w: np.ndarray
    qn_gid: np.ndarray
    # reciprocal of bilinear: c0 / ((y[arow]+ca) * (y[brow]+cb))
    rb_arow: np.ndarray
    rb_ca: np.ndarray
    rb_brow: np.ndarray
    rb_cb: np.ndarray
    rb_c0: np.ndarray
    rb_tgt: np.ndarray
    # c0 * sqrt(y[row] + cu)
    sq_row: np.ndarray
    sq_c0: np.ndarray
    sq_cu: np.ndarray
    sq_tgt: np.ndarray
    # c0 * log(y[row] + cu)
    lg_row: np.ndarray
    lg_c0: np.ndarray
    lg_cu: np.ndarray
    lg_tgt: np.ndarray


class _Builder:
    def __init__(self, n):
        self.n = n
        self.rows = []
        self.aff = {}  # target -> accumulated affine row
        self.tabs = {k: [] for k in ("q", "ra", "qg", "qn", "rb", "sq", "lg")}

    def add_row(self, a):
        self.rows.append(np.asarray(a, dtype=float))
        return len(self.rows) - 1

    def add_atom(self, atom, tgt):
        if isinstance(atom, at.Affine):
            acc = self.aff.setdefault(tgt, np.zeros(self.n))
            acc += atom.a
            return atom.c
        if isinstance(atom, at.SquaredForms):
            for row, w in zip(atom.rows, atom.w):
                if w != 0.0:
                    self.tabs["q"].append((self.add_row(row), w, tgt))
            return 0.0
        if isinstance(atom, at.RecipAffine):
            self.tabs["ra"].append((self.add_row(atom.a), atom.c0, atom.c, tgt))
            return 0.0
        if isinstance(atom, at.QuadOverAffine):
            gid = len(self.tabs["qg"])
            self.tabs["qg"].append((self.add_row(atom.b), atom.cb, tgt))
            for row, w in zip(atom.rows, atom.w):
                self.tabs["qn"].append((self.add_row(row), w, gid))
            return 0.0
        if isinstance(atom, at.RecipBilinear):
            self.tabs["rb"].append(
                (self.add_row(atom.a), atom.ca, self.add_row(atom.b), atom.cb,
                 atom.c0, tgt))
            return 0.0
        if isinstance(atom, at.SqrtAffine):
            self.tabs["sq"].append((self.add_row(atom.a), atom.c0, atom.c, tgt))
            return 0.0
        if isinstance(atom, at.LogAffine):
            self.tabs["lg"].append((self.add_row(atom.a), atom.c0, atom.c, tgt))
            return 0.0
        raise TypeError(f"unsupported atom type {type(atom)!r}")


def _cols(entries, types):
    if not entries:
        return tuple(np.zeros(0, dtype=t) for t in types)
    return tuple(np.asarray(col, dtype=t) for col, t in zip(zip(*entries), types))


def pack_model(objective, constraints, n):
    """Pack an objective Expr and a list of constraint Exprs."""
    b = _Builder(n)
    obj_const = objective.const
    for a in objective.atoms:
        obj_const += b.add_atom(a, -1)
    con_const = np.zeros(len(constraints))
    for j, expr in enumerate(constraints):
        con_const[j] = expr.const
        for a in expr.atoms:
            con_const[j] += b.add_atom(a, j)
    # emit merged affine rows
    aff_entries = []
    for tgt, acc in sorted(b.aff.items()):
        if np.any(acc != 0.0):
            aff_entries.append((b.add_row(acc), tgt))
    L = np.ascontiguousarray(np.vstack(b.rows)) if b.rows else np.zeros((0, n))
    i8, f8 = np.int64, np.float64
    aff_row, aff_tgt = _cols(aff_entries, (i8, i8))
    q_row, q_w, q_tgt = _cols(b.tabs["q"], (i8, f8, i8))
    ra_row, ra_c0, ra_cu, ra_tgt = _cols(b.tabs["ra"], (i8, f8, f8, i8))
    qg_brow, qg_cb, qg_tgt = _cols(b.tabs["qg"], (i8, f8, i8))
    qn_row, qn_w, qn_gid = _cols(b.tabs["qn"], (i8, f8, i8))
    rb_arow, rb_ca, rb_brow, rb_cb, rb_c0, rb_tgt = _cols(
        b.tabs["rb"], (i8, f8, i8, f8, f8, i8))
    sq_row, sq_c0, sq_cu, sq_tgt = _cols(b.tabs["sq"], (i8, f8, f8, i8))
    lg_row, lg_c0, lg_cu, lg_tgt = _cols(b.tabs["lg"], (i8, f8, f8, i8))
    return PackedModel(
        n=n, m=len(constraints), L=L, obj_const=float(obj_const),
        con_const=con_const,
        aff_row=aff_row, aff_tgt=aff_tgt,
        q_row=q_row, q_w=q_w, q_tgt=q_tgt,
        ra_row=ra_row, ra_c0=ra_c0, ra_cu=ra_cu, ra_tgt=ra_tgt,
        qg_brow=qg_brow, qg_cb=qg_cb, qg_tgt=qg_tgt,
        qn_row=qn_row, qn_w=qn_w, qn_gid=qn_gid,
        rb_arow=rb_arow, rb_ca=rb_ca, rb_brow=rb_brow, rb_cb=rb_cb,
        rb_c0=rb_c0, rb_tgt=rb_tgt,
        sq_row=sq_row, sq_c0=sq_c0, sq_cu=sq_cu, sq_tgt=sq_tgt,
        lg_row=lg_row, lg_c0=lg_c0, lg_cu=lg_cu, lg_tgt=lg_tgt,
    )
