"""Complex ball arithmetic and certified root isolation.

A Ball is a midpoint (mpc) with an error radius (mpf) covering
|z - mid| <= rad.  Operations are performed at the caller's mpmath
working precision; radii are inflated to absorb midpoint rounding, so
every operation returns an enclosure of the exact result set.

Root isolation runs approximate polishing (mpmath.polyroots) followed by
an interval Newton certification N(Z) = mid(Z) - f(mid(Z)) / f'(Z);
containment N(Z) in the interior of Z proves there is exactly one root
in Z (0 not in f'(Z) makes f injective on the convex ball, and the
contraction gives existence).
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf, workprec

from .errors import PrecisionExhausted


def _slop():
    # Per-operation rounding allowance at current precision.
    return mpf(2) ** (4 - mp.prec)


class Ball:
    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=0):
        self.mid = mpc(mid)
        self.rad = mpf(rad)

    @classmethod
    def exact_rational(cls, q):
        q = Fraction(q)
        mid = mpf(q.numerator) / mpf(q.denominator)
        return cls(mid, abs(mid) * _slop())

    def __repr__(self):
        return f"Ball({self.mid}, rad={mpmath.nstr(self.rad, 3)})"

    def __add__(self, other):
        other = _coerce(other)
        mid = self.mid + other.mid
        rad = self.rad + other.rad + abs(mid) * _slop()
        return Ball(mid, rad)

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        mid = self.mid * other.mid
        rad = (abs(self.mid) * other.rad + abs(other.mid) * self.rad
               + self.rad * other.rad + abs(mid) * _slop() + _slop() ** 4)
        return Ball(mid, rad)

    __rmul__ = __mul__

    def inverse(self):
        am = abs(self.mid)
        if self.rad >= am:
            raise ZeroDivisionError("ball contains zero")
        mid = 1 / self.mid
        # |1/z - 1/m| <= r / (|m| (|m|-r)) over the ball
        rad = self.rad / (am * (am - self.rad)) + abs(mid) * _slop()
        return Ball(mid, rad)

    def __truediv__(self, other):
        return self * _coerce(other).inverse()

    def conjugate(self):
        return Ball(mpmath.conj(self.mid), self.rad)

    def contains_zero(self):
        return abs(self.mid) <= self.rad

    def abs_bounds(self):
        """(lo, hi) with lo <= |z| <= hi certified for every z in the ball."""
        am = abs(self.mid)
        hi = (am + self.rad) * (1 + _slop())
        lo = (am - self.rad) * (1 - _slop())
        if lo < 0:
            lo = mpf(0)
        return lo, hi

    def overlaps(self, other):
        return abs(self.mid - other.mid) <= (self.rad + other.rad) * (1 + _slop())

    def contains_ball(self, other):
        return abs(self.mid - other.mid) + other.rad <= self.rad * (1 + _slop())

    def disjoint(self, other):
        return abs(self.mid - other.mid) > (self.rad + other.rad) * (1 + _slop())


def _coerce(x):
    if isinstance(x, Ball):
        return x
    if isinstance(x, Fraction):
        return Ball.exact_rational(x)
    if isinstance(x, int):
        return Ball(mpf(x), 0)
    return Ball(x, abs(mpc(x)) * _slop())


def coeff_balls(coeffs):
    """Balls enclosing rational coefficients (constant term first)."""
    return [Ball.exact_rational(Fraction(c)) for c in coeffs]


def eval_poly(balls, z):
    """Horner evaluation of a coefficient-ball polynomial at a Ball."""
    acc = Ball(mpf(0), 0)
    for c in reversed(balls):
        acc = acc * z + c
    return acc


def log_bounds(lo, hi):
    """(value, rad) enclosing log of a positive interval [lo, hi]."""
    if lo <= 0:
        raise PrecisionExhausted("log of interval touching zero")
    llo = mpmath.log(lo) - _slop() * (1 + abs(mpmath.log(lo)))
    lhi = mpmath.log(hi) + _slop() * (1 + abs(mpmath.log(hi)))
    return (llo + lhi) / 2, (lhi - llo) / 2


def _newton_step(fballs, dballs, z):
    fm = eval_poly(fballs, Ball(z.mid, 0))
    der = eval_poly(dballs, z)
    if der.contains_zero():
        return None
    step = fm / der
    return Ball(z.mid - step.mid, step.rad + abs(step.mid) * _slop())


def certify_root(coeffs, approx, prec, initial_rad=None):
    """Certified ball around a simple root near `approx`, or None."""
    with workprec(prec + 32):
        fballs = coeff_balls(coeffs)
        dballs = coeff_balls(
            [Fraction(c) * (i + 1) for i, c in enumerate(coeffs[1:])])
        rad = mpf(initial_rad) if initial_rad is not None else mpf(2) ** (-prec // 4)
        z = Ball(mpc(approx), rad)
        for _ in range(8):
            nxt = _newton_step(fballs, dballs, z)
            if nxt is None:
                rad = rad / 8
                if rad < mpf(2) ** (-2 * prec):
                    return None
                z = Ball(z.mid, rad)
                continue
            if z.contains_ball(nxt) and nxt.rad < z.rad:
                # Certified: keep contracting inside the certified region.
                cur = nxt
                for _ in range(6):
                    again = _newton_step(fballs, dballs, cur)
                    if again is None or not cur.contains_ball(again):
                        break
                    if again.rad >= cur.rad:
                        break
                    cur = again
                return cur
            z = Ball(nxt.mid, nxt.rad * 4 + z.rad / 2)
        return None


def isolate_roots(coeffs, prec):
    """Certified pairwise-disjoint balls around all roots of a squarefree
    integer/rational polynomial (constant term first)."""
    deg = len(coeffs) - 1
    if deg < 1:
        return []
    work = max(2 * prec, 128)
    for attempt in range(4):
        with workprec(work):
            poly_desc = [mpf(Fraction(c).numerator) / mpf(Fraction(c).denominator)
                         for c in reversed(coeffs)]
            try:
                approx = mpmath.polyroots(poly_desc, maxsteps=200, extraprec=work)
            except mpmath.libmp.NoConvergence:
                work *= 2
                continue
        balls = []
        ok = True
        for r in approx:
            ball = certify_root(coeffs, r, prec)
            if ball is None:
                ok = False
                break
            balls.append(ball)
        if ok and len(balls) == deg:
            with workprec(prec + 32):
                disjoint = all(balls[i].disjoint(balls[j])
                               for i in range(deg) for j in range(i + 1, deg))
            if disjoint:
                return balls
        work *= 2
    raise PrecisionExhausted(f"could not certify roots at {prec} bits")


def refine_roots(coeffs, old_balls, prec):
    """Refine certified balls at higher precision, nested inside the old
    ones by construction (Newton contraction never leaves the start ball)."""
    with workprec(prec + 32):
        fballs = coeff_balls(coeffs)
        dballs = coeff_balls(
            [Fraction(c) * (i + 1) for i, c in enumerate(coeffs[1:])])
        out = []
        for old in old_balls:
            cur = Ball(old.mid, old.rad)
            for _ in range(prec):
                nxt = _newton_step(fballs, dballs, cur)
                if nxt is None or not cur.contains_ball(nxt):
                    break
                stalled = nxt.rad > cur.rad / 2
                cur = nxt
                if stalled or cur.rad < mpf(2) ** (-2 * prec):
                    break
            if not old.contains_ball(cur):
                raise PrecisionExhausted("refinement escaped its parent ball")
            out.append(cur)
    return out
