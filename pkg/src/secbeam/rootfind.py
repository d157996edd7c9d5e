"""Bisection with one-sided stopping rules and integer bracket expansion.

The two bisection variants differ only in which side of the root the
returned point is allowed to sit on:

* :func:`bisect_upper` stops at ``0 <= f(x) <= eps_b`` (used for the
  eavesdropper outage equation, whose admissible set is ``f >= 0``),
* :func:`bisect_lower` stops at ``-eps_b <= f(x) <= 0`` (used for the user
  outage threshold equation, whose admissible set is ``f <= 0``).

Functions may signal "out of domain" by returning ``+inf``; such points are
treated as lying on the positive side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoBracket, NoSignChange

_MAX_BISECT = 300


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] with endpoint values of opposite sign.

    One endpoint value may be exactly zero.
    """

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise NoSignChange(f"empty bracket [{self.lo}, {self.hi}]")
        if self.f_lo > 0.0 or self.f_hi < 0.0:
            raise NoSignChange(
                f"no sign change: f({self.lo})={self.f_lo}, f({self.hi})={self.f_hi}"
            )


def bisect_upper(f, bracket, eps_b):
    """Root of an increasing ``f`` with the stopping rule 0 <= f(x) <= eps_b.

    ``bracket`` must satisfy ``f(lo) <= 0 <= f(hi)``.
    """
    if eps_b <= 0:
        raise ValueError("eps_b must be positive")
    if 0.0 <= bracket.f_hi <= eps_b:
        return bracket.hi
    if 0.0 <= bracket.f_lo <= eps_b:
        return bracket.lo
    lo, hi = bracket.lo, bracket.hi
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if 0.0 <= v <= eps_b:
            return mid
        if v < 0.0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection failed to reach tolerance (non-monotone f?)")


def bisect_lower(f, bracket, eps_b):
    """Mirror of :func:`bisect_upper` stopping at -eps_b <= f(x) <= 0."""
    if eps_b <= 0:
        raise ValueError("eps_b must be positive")
    if -eps_b <= bracket.f_lo <= 0.0:
        return bracket.lo
    if -eps_b <= bracket.f_hi <= 0.0:
        return bracket.hi
    lo, hi = bracket.lo, bracket.hi
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if -eps_b <= v <= 0.0:
            return mid
        if v < 0.0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection failed to reach tolerance (non-monotone f?)")


def _scan_smallest_nu(pred, nu_max, exact_limit=64):
    """Smallest integer nu >= 2 with pred(nu), or None.

    A linear scan is used up to ``exact_limit``; beyond that the scan grows
    geometrically and finishes with a binary search, which preserves bracket
    validity (the endpoint signs) though not necessarily minimality of nu.
    """
    for nu in range(2, min(exact_limit, nu_max) + 1):
        if pred(nu):
            return nu
    if nu_max <= exact_limit:
        return None
    lo = exact_limit  # pred(lo) is False
    hi = 2 * exact_limit
    while True:
        if hi > nu_max:
            hi = nu_max
        if pred(hi):
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if pred(mid):
                    hi = mid
                else:
                    lo = mid
            return hi
        if hi == nu_max:
            return None
        lo = hi
        hi *= 2


def expand_bracket_integer(f, x0, nu_max=10**6):
    """Bracket a sign change of ``f`` around ``x0 > 0``.

    If ``f(x0) >= 0`` the segment ``[x0/nu, x0]`` is returned with the
    smallest integer ``nu`` such that ``f(x0/nu) < 0``; if ``f(x0) < 0``
    the segment ``[x0, nu*x0]`` with the smallest integer such that
    ``f(nu*x0) >= 0`` (a zero upper boundary counts as valid).  Points
    where ``f`` returns ``+inf`` (out of domain) count as positive.
    """
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    v0 = f(x0)
    if v0 >= 0.0:
        vals = {}

        def hit(nu):
            vals[nu] = f(x0 / nu)
            return vals[nu] < 0.0

        nu = _scan_smallest_nu(hit, nu_max)
        if nu is None:
            raise NoBracket(f"no sign change below x0={x0} within nu_max={nu_max}")
        return Bracket(lo=x0 / nu, hi=x0, f_lo=vals[nu], f_hi=v0)
    vals = {}

    def hit(nu):
        vals[nu] = f(nu * x0)
        return vals[nu] >= 0.0

    nu = _scan_smallest_nu(hit, nu_max)
    if nu is None:
        raise NoBracket(f"no sign change above x0={x0} within nu_max={nu_max}")
    return Bracket(lo=x0, hi=nu * x0, f_lo=v0, f_hi=vals[nu])
