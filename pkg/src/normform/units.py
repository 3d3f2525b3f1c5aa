"""Unit-group data: torsion generator, fundamental units, logarithmic
embeddings, discrete logarithms, and solution-tuple heights.

Fundamentality of the supplied units cannot be certified here; the
package verifies multiplicative independence (nonzero regulator) and
reports completeness as conditional unless the bundle asserts the units
are fundamental.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import NamedTuple

import mpmath
from mpmath import mpf, workprec

from .errors import NotAUnit, NotInSpan
from .field import default_precision, embed, nf_norm


class ExponentVector(NamedTuple):
    k: int              # torsion exponent, residue mod w
    a: tuple            # integer exponents on the fundamental units

    def key(self):
        return (self.k,) + tuple(self.a)


@dataclass
class UnitGroupData:
    field: object
    zeta: object                # NFElement generating torsion
    w: int                      # torsion order
    fund_units: tuple           # NFElements
    regulator_declared: str = None
    units_fundamental: bool = False
    _caches: dict = dc_field(default_factory=dict, repr=False)

    @property
    def rank(self):
        return len(self.fund_units)

    def zeta_power_index(self):
        cache = self._caches.get("zeta_powers")
        if cache is None:
            cache = {}
            cur = self.field.one()
            for k in range(self.w):
                cache[cur.coords] = k
                cur = cur * self.zeta
            self._caches["zeta_powers"] = cache
        return cache

    def log_matrix(self, table, places, prec):
        """(rows, err): log embeddings of the fundamental units."""
        key = ("logmat", id(table), id(places), prec)
        got = self._caches.get(key)
        if got is None:
            rows = []
            err = mpf(0)
            for eps in self.fund_units:
                vals, e = log_embedding(eps, table, places, prec)
                rows.append(vals)
                err = max(err, e)
            got = (rows, err)
            self._caches[key] = got
        return got

    def inv_square_matrix(self, table, places, prec):
        """Inverse of the r x r system mapping exponents to the first r
        log-embedding coordinates: column i holds lambda(eps_i)."""
        key = ("invsq", id(table), id(places), prec)
        got = self._caches.get(key)
        if got is None:
            rows, _err = self.log_matrix(table, places, prec)
            r = self.rank
            with workprec(prec + 32):
                m = mpmath.matrix([[rows[i][j] for i in range(r)]
                                   for j in range(r)])
                got = m ** -1
            self._caches[key] = got
        return got


def _is_unit(u):
    return abs(nf_norm(u)) == 1


def log_embedding(u, table, places, prec=None):
    """(values, err): the vector (2 log|sigma(u)|_nu) over places, with a
    certified error bound.  Coordinates sum to 0 within err * s."""
    prec = prec or table.precision
    if not _is_unit(u):
        raise NotAUnit(f"norm {nf_norm(u)} is not a unit norm")
    balls = embed(u, table)
    values = []
    err = mpf(0)
    with workprec(prec + 32):
        for (i, _ibar) in places.pairs:
            lo, hi = balls[i].abs_bounds()
            if lo <= 0:
                raise NotAUnit("embedding interval touches zero")
            l_lo, l_hi = mpmath.log(lo), mpmath.log(hi)
            values.append(l_lo + l_hi)          # 2 * midpoint of log
            err = max(err, (l_hi - l_lo) + mpf(2) ** (16 - prec))
    return values, err


def unit_from_exponents(e, ug):
    """Exact zeta^k * prod eps_i^{a_i}."""
    out = ug.zeta ** (e.k % ug.w) if e.k % ug.w else ug.field.one()
    for eps, ai in zip(ug.fund_units, e.a):
        if ai:
            out = out * eps ** ai
    return out


def unit_discrete_log(u, ug, table, places, prec=None):
    """ExponentVector with u = zeta^k prod eps^a, verified exactly by
    reconstruction.  Searches a +-1 box around the rounded real solution
    before giving up with NotInSpan."""
    prec = prec or table.precision
    if not _is_unit(u):
        raise NotAUnit(f"norm {nf_norm(u)} is not a unit norm")
    r = ug.rank
    if r == 0:
        idx = ug.zeta_power_index().get(u.coords)
        if idx is None:
            raise NotInSpan("torsion-only group does not contain the element")
        return ExponentVector(idx, ())
    vals, _err = log_embedding(u, table, places, prec)
    inv = ug.inv_square_matrix(table, places, prec)
    with workprec(prec + 32):
        target = mpmath.matrix([vals[j] for j in range(r)])
        approx = inv * target
        base = [int(mpmath.nint(approx[i])) for i in range(r)]
        dist = [abs(approx[i] - base[i]) for i in range(r)]
    offsets = sorted(_box_offsets(r), key=lambda off: sum(
        float(dist[i]) if off[i] else 0 for i in range(r)))
    zpows = ug.zeta_power_index()
    for off in offsets:
        a = tuple(base[i] + off[i] for i in range(r))
        q = u
        for eps, ai in zip(ug.fund_units, a):
            if ai:
                q = q * eps ** (-ai)
        k = zpows.get(q.coords)
        if k is not None:
            return ExponentVector(k, a)
    raise NotInSpan("no exponent vector reconstructs the unit "
                    "(non-fundamental units or torsion mismatch?)")


def _box_offsets(r):
    out = [()]
    for _ in range(r):
        out = [o + (d,) for o in out for d in (0, -1, 1)]
    return out


def regulator_from_logs(ug, table, places, prec=None):
    """|det| of the r x r block of the log-embedding matrix, halved per
    row to match the classical normalization log|.| (not log||.||)."""
    prec = prec or table.precision
    rows, _err = ug.log_matrix(table, places, prec)
    r = ug.rank
    if r == 0:
        return mpf(1)
    with workprec(prec + 32):
        m = mpmath.matrix([[rows[i][j] / 2 for j in range(r)] for i in range(r)])
        return abs(mpmath.det(m))


def validate_unit_group(ug, table, places, prec=None, rel_tol=mpf("1e-6")):
    """Structured failure list; empty means the data passes."""
    prec = prec or table.precision
    failures = []
    if abs(nf_norm(ug.zeta)) != 1:
        failures.append(("NonUnitGenerator", "torsion generator has non-unit norm"))
    else:
        cur = ug.zeta
        order = 1
        while order < ug.w and cur != ug.field.one():
            cur = cur * ug.zeta
            order += 1
        if order < ug.w:
            failures.append(("TorsionOrderWrong",
                             f"zeta has order {order} < declared {ug.w}"))
        elif cur != ug.field.one():
            failures.append(("TorsionOrderWrong", f"zeta^{ug.w} != 1"))
    for i, eps in enumerate(ug.fund_units):
        if abs(nf_norm(eps)) != 1:
            failures.append(("NonUnitGenerator", f"fund_units[{i}] has non-unit norm"))
    if any(code == "NonUnitGenerator" for code, _ in failures):
        return failures
    reg = regulator_from_logs(ug, table, places, prec)
    if reg < mpf(2) ** (-(prec // 4)):
        failures.append(("DependentUnits", "regulator vanishes"))
        return failures
    if ug.regulator_declared is not None:
        declared = mpf(ug.regulator_declared)
        if abs(reg - declared) > rel_tol * abs(declared):
            failures.append(("RegulatorMismatch",
                             f"declared {declared}, recomputed {reg}"))
    return failures


def tuple_height(units, table, places, prec=None):
    """(H, h, err) for a tuple: H = prod over places of the max of the
    place norms ||.||_nu across the tuple entries; h = log H."""
    prec = prec or table.precision
    with workprec(prec + 32):
        embeds = [embed(u, table) for u in units]
        log_lo = mpf(0)
        log_hi = mpf(0)
        for (i, _ibar) in places.pairs:
            his = []
            los = []
            for balls in embeds:
                lo, hi = balls[i].abs_bounds()
                los.append(lo)
                his.append(hi)
            mlo, mhi = max(los), max(his)
            if mlo <= 0:
                raise NotAUnit("tuple entry embeds to zero")
            log_lo += 2 * mpmath.log(mlo)
            log_hi += 2 * mpmath.log(mhi)
        h_mid = (log_lo + log_hi) / 2
        err = (log_hi - log_lo) / 2 + mpf(2) ** (16 - prec)
        return mpmath.exp(h_mid), h_mid, err
