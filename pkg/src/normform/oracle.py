"""Independent brute-force verifiers.

The coefficient-box oracle evaluates norms by a route deliberately
disjoint from the solver's: a multi-prime filter using the resultant as
a product over the roots of f modulo completely split primes, followed
by exact confirmation through a Sylvester-matrix determinant.  The
solver side expands the norm form through Galois conjugates; neither
path shares code with the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import modp
from .equations import UnitEquation
from .errors import CapExceeded, InvalidInput
from .galois import apply_automorphism
from .units import ExponentVector, unit_from_exponents


@dataclass(frozen=True)
class BoxSpec:
    bounds: tuple        # per-coordinate positive integer bound
    cap: int = 20_000_000

    @classmethod
    def uniform(cls, bound, k, cap=20_000_000):
        return cls((int(bound),) * k, cap)

    def npoints(self):
        out = 1
        for b in self.bounds:
            if b < 1:
                raise InvalidInput("box bounds must be positive")
            out *= 2 * b + 1
        return out


def _sylvester_resultant(f, g):
    """Res(f, g) for integer polynomials (constant first), f monic, via a
    fraction-free determinant of the Sylvester matrix."""
    n = len(f) - 1
    m = len(g) - 1
    if m < 0:
        return 0
    size = n + m
    rows = []
    frev = list(reversed(f))
    grev = list(reversed(g))
    for i in range(m):
        rows.append([0] * i + frev + [0] * (size - n - 1 - i))
    for i in range(n):
        rows.append([0] * i + grev + [0] * (size - m - 1 - i))
    # Bareiss determinant on integer entries
    a = [row[:] for row in rows]
    sign = 1
    prev = 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, size) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[size - 1][size - 1]


def _alpha_coord_matrix(problem):
    """(C, D): integer matrix with column i the coords of D*alpha_i."""
    d = 1
    for a in problem.alphas:
        da = a.denominator_lcm()
        d = d * da // math.gcd(d, da)
    n = problem.field.degree
    k = len(problem.alphas)
    c = [[int(problem.alphas[i].coords[l] * d) for i in range(k)]
         for l in range(n)]
    return c, d


def oracle_coefficient_box(problem, box, workers=1):
    """Every integer vector in the box whose norm-form value equals m,
    exhaustively and exactly; deterministic sorted output."""
    if len(box.bounds) != len(problem.alphas):
        raise InvalidInput("box dimension mismatch")
    npts = box.npoints()
    if npts > box.cap:
        raise CapExceeded(f"box holds {npts} points, cap {box.cap}")
    f = problem.field.min_poly
    n = problem.field.degree
    k = len(problem.alphas)
    cmat, d = _alpha_coord_matrix(problem)
    target = problem.m * d ** n

    primes = modp.good_split_primes(f, 3, start=1 << 20)
    roots_per_prime = [modp.roots_split(f, p) for p in primes]

    bounds = box.bounds
    stripes = _stripes(bounds[0], workers)
    candidates = []
    for lo, hi in stripes:
        candidates.extend(_scan_stripe(bounds, lo, hi, cmat, target,
                                       primes, roots_per_prime, n, k))
    out = []
    seen = set()
    for x in candidates:
        if x in seen:
            continue
        seen.add(x)
        coords = [sum(cmat[l][i] * x[i] for i in range(k)) for l in range(n)]
        gpoly = modp.trim(coords)
        if not gpoly:
            res = 0
        else:
            res = _sylvester_resultant(list(f), list(gpoly))
        if res == target:
            out.append(tuple(x))
    return sorted(out)


def _stripes(bound, workers):
    values = list(range(-bound, bound + 1))
    workers = max(1, int(workers))
    size = max(1, (len(values) + workers - 1) // workers)
    return [(values[i], values[min(i + size, len(values)) - 1])
            for i in range(0, len(values), size)]


def _scan_stripe(bounds, x0_lo, x0_hi, cmat, target, primes, roots_per_prime, n, k):
    rest = bounds[1:]
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in rest]
    if ranges:
        mesh = np.meshgrid(*ranges, indexing="ij")
        cols = [m.reshape(-1) for m in mesh]
    else:
        cols = []
    nrest = cols[0].shape[0] if cols else 1
    out = []
    for x0 in range(x0_lo, x0_hi + 1):
        mask = None
        for p, roots in zip(primes, roots_per_prime):
            tmod = target % p
            # coordinate vector of the element, mod p
            coords = []
            for l in range(n):
                acc = np.full(nrest, (cmat[l][0] * x0) % p, dtype=np.int64)
                for i in range(1, k):
                    if cmat[l][i]:
                        acc = (acc + cmat[l][i] * cols[i - 1]) % p
                coords.append(acc)
            prod = np.ones(nrest, dtype=np.int64)
            for r in roots:
                val = coords[n - 1] % p
                for l in range(n - 2, -1, -1):
                    val = (val * r + coords[l]) % p
                prod = (prod * val) % p
            good = prod == tmod
            mask = good if mask is None else (mask & good)
            if not mask.any():
                break
        if mask is None or not mask.any():
            continue
        idx = np.nonzero(mask)[0]
        for i in idx:
            out.append((x0,) + tuple(int(c[i]) for c in cols))
    return out


# ---------------------------------------------------------------------------


def oracle_exponent_box(eq, ug, box, gal=None, workers=1):
    """Exponent-box search over a unit equation.

    Independent unknowns: the last nonzero unknown is normalized to the
    trivial unit (projective convention) and the remaining unknowns range
    over the box; the zero set is found by an exact meet-in-the-middle
    join (identical to the naive nested scan, point for point).
    A single conjugate-linked unknown is enumerated without normalization
    and substituted exactly through the Galois table.

    Returns sorted flattened exponent tuples (k, a_1..a_r per unknown).
    """
    terms = eq.nonzero()
    unknowns = eq.unknowns()
    r = ug.rank
    per_var = ug.w * (2 * box.bounds[0] + 1) ** r if r else ug.w
    if len(unknowns) == 1:
        if per_var > box.cap:
            raise CapExceeded("exponent box exceeds cap")
        return _single_unknown_scan(eq, ug, box, gal)
    if per_var * (len(unknowns) - 1) > box.cap:
        raise CapExceeded("exponent box exceeds cap")
    if any(eq.slots[i].sigma != 0 for i, _c in terms):
        raise InvalidInput("independent unknowns must use identity slots")

    # normalize the last unknown to 1
    last = unknowns[-1]
    const = ug.field.zero()
    split = {}
    for i, c in terms:
        var = eq.slots[i].var
        if var == last:
            const = const + c
        else:
            split.setdefault(var, []).append(c)
    free_vars = [v for v in unknowns if v != last]
    if len(free_vars) == 1:
        coef = _sum_all(split[free_vars[0]], ug.field)
        table = {}
        for e, u in _unit_box(ug, box.bounds[0]):
            table.setdefault((coef * u).coords, []).append(e)
        hits = table.get((-const).coords, [])
        return sorted(tuple(e.key()) + tuple(ExponentVector(0, (0,) * r).key())
                      for e in hits)
    if len(free_vars) != 2:
        raise InvalidInput("the exponent oracle handles at most 3 unknowns")
    c1 = _sum_all(split[free_vars[0]], ug.field)
    c2 = _sum_all(split[free_vars[1]], ug.field)
    left = {}
    for e, u in _unit_box(ug, box.bounds[0]):
        left.setdefault((c1 * u).coords, []).append(e)
    out = []
    trivial = ExponentVector(0, (0,) * r)
    for e2, u2 in _unit_box(ug, box.bounds[0]):
        want = (-const - c2 * u2).coords
        for e1 in left.get(want, []):
            out.append(tuple(e1.key()) + tuple(e2.key()) + tuple(trivial.key()))
    return sorted(out)


def _sum_all(items, field):
    acc = field.zero()
    for c in items:
        acc = acc + c
    return acc


def _unit_box(ug, bound):
    """All units zeta^k prod eps^a with |a_i| <= bound, built incrementally."""
    r = ug.rank
    zeta_pows = [ug.field.one()]
    for _ in range(ug.w - 1):
        zeta_pows.append(zeta_pows[-1] * ug.zeta)

    def rec(i, prefix_exps, prefix_val):
        if i == r:
            for k, zp in enumerate(zeta_pows):
                yield ExponentVector(k, tuple(prefix_exps)), zp * prefix_val
            return
        eps = ug.fund_units[i]
        cur = prefix_val * eps ** (-bound)
        for a in range(-bound, bound + 1):
            yield from rec(i + 1, prefix_exps + [a], cur)
            if a < bound:
                cur = cur * eps
        return

    yield from rec(0, [], ug.field.one())


def _single_unknown_scan(eq, ug, box, gal):
    terms = eq.nonzero()
    r = ug.rank
    out = []
    for e, u in _unit_box(ug, box.bounds[0]):
        acc = ug.field.zero()
        for i, c in terms:
            s = eq.slots[i]
            img = apply_automorphism(s.sigma, u, gal) if s.sigma else u
            acc = acc + c * img
        if not acc:
            out.append(tuple(e.key()))
    return sorted(out)
