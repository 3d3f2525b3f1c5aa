"""Galois group as root permutations, with exact automorphism matrices,
and the pairing of embeddings into infinite places.

Automorphism candidates are generated numerically (integer-relation
search via exact LLL on scaled root values) and then certified by exact
evaluation f(sigma(theta)) = 0 in the field; the numeric step can only
propose, never accept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf, workprec

from . import ball, linalg
from .errors import NotGalois, NotTotallyComplex, PrecisionExhausted
from .field import (EmbeddingTable, NFElement, embed, poly_derivative,
                    resultant)


@dataclass
class GaloisGroupTable:
    field: object
    images: tuple            # sigma_j(theta) as NFElement, index 0 = identity
    perms: tuple             # perms[j][i] = image root index of root i under sigma_j
    matrices: tuple          # coordinate action of sigma_j (rows of Fractions)
    comp: tuple              # comp[a][b] = index of sigma_a o sigma_b
    inv: tuple               # inverse indices

    @property
    def order(self):
        return len(self.images)

    def identity_index(self):
        return self.inv.index  # pragma: no cover

    def compose(self, a, b):
        return self.comp[a][b]

    def inverse(self, a):
        return self.inv[a]


def apply_automorphism(sigma, a, table):
    """Exact sigma_j(a): evaluates a's representative at sigma(theta)."""
    m = table.matrices[sigma]
    coords = a.coords
    out = [Fraction(0)] * len(coords)
    for j, c in enumerate(coords):
        if c:
            row = m[j]
            for i in range(len(coords)):
                out[i] += c * row[i]
    return NFElement(a.field, tuple(out))


def _disc_bound(field):
    f = field._min_poly_frac
    disc = resultant(f, poly_derivative(f))
    return max(2, int(abs(disc)))


def _relation_candidates(field, table, j, prec):
    """Shortest LLL vectors proposing sigma(theta) = (sum p_l theta^l)/d
    matched against root j; exact verification is the caller's job."""
    n = field.degree
    with workprec(prec + 32):
        scale = mpf(2) ** prec
        vals = []
        cur = ball.Ball(mpf(1), 0)
        r1 = table.roots[0]
        for _ in range(n):
            vals.append(cur.mid)
            cur = cur * r1
        target = table.roots[j].mid
        rows = []
        for i in range(n):
            rows.append([1 if k == i else 0 for k in range(n + 1)]
                        + [int(mpmath.nint(vals[i].real * scale)),
                           int(mpmath.nint(vals[i].imag * scale))])
        rows.append([1 if k == n else 0 for k in range(n + 1)]
                    + [int(mpmath.nint(-target.real * scale)),
                       int(mpmath.nint(-target.imag * scale))])
    reduced = linalg.lll_reduce(rows)
    out = []
    for vec in reduced[: min(4, len(reduced))]:
        p, d = vec[:n], vec[n]
        if d == 0:
            continue
        g = math.gcd(abs(d), 0)
        for c in p:
            g = math.gcd(g, abs(c))
        g = math.gcd(g, abs(d)) or 1
        out.append(tuple(Fraction(c, d) for c in p))
    return out


def _eval_min_poly_at(field, g):
    acc = field.zero()
    for c in reversed(field.min_poly):
        acc = acc * g + field.from_rational(c)
    return acc


def compute_galois_table(field, table):
    """Find all n automorphisms, certify them exactly, assemble the
    permutation/action tables, and verify the group axioms."""
    n = field.degree
    prec = table.precision

    images = [None] * n
    for attempt in range(3):
        cur_table = table if attempt == 0 else table.refined(prec)
        missing = [j for j in range(n) if images[j] is None]
        for j in missing:
            for cand in _relation_candidates(field, cur_table, j, prec):
                g = field.element(cand)
                if not _eval_min_poly_at(field, g):
                    images[j] = g
                    break
        if all(im is not None for im in images):
            break
        prec *= 2
    bad = [j for j in range(n) if images[j] is None]
    if bad:
        raise NotGalois(
            f"{field.label or 'field'}: roots {bad} are not expressible in the "
            f"field (searched up to {prec} bits; disc bound {_disc_bound(field)})")
    if len(set(im.coords for im in images)) != n:
        raise NotGalois("duplicate automorphism images; defining polynomial "
                        "is likely reducible")

    # coordinate action matrices: row j = coords of images^j
    matrices = []
    for g in images:
        rows = []
        power = field.one()
        for _ in range(n):
            rows.append(power.coords)
            power = power * g
        matrices.append(tuple(rows))

    # permutations by certified root matching (values are exact roots)
    work_table = table
    perms = []
    for j, g in enumerate(images):
        perm = _root_permutation(field, g, work_table)
        while perm is None:
            work_table = work_table.refined(work_table.precision * 2)
            perm = _root_permutation(field, g, work_table)
        perms.append(tuple(perm))

    # identity must be at index 0 given canonical root order
    ident = next(i for i, g in enumerate(images) if g == field.theta())
    if ident != 0:
        order = [ident] + [i for i in range(n) if i != ident]
        images = [images[i] for i in order]
        matrices = [matrices[i] for i in order]
        perms = [perms[i] for i in order]

    index_of = {im.coords: i for i, im in enumerate(images)}
    comp = []
    for a in range(n):
        row = []
        for b in range(n):
            composed = NFElement(field, tuple(
                sum(images[b].coords[l] * matrices[a][l][i] for l in range(n))
                for i in range(n)))
            idx = index_of.get(composed.coords)
            if idx is None:
                raise NotGalois("automorphisms are not closed under composition")
            row.append(idx)
        comp.append(tuple(row))
    inv = [0] * n
    for a in range(n):
        for b in range(n):
            if comp[a][b] == 0:
                inv[a] = b
                break
        else:
            raise NotGalois("automorphism without inverse")
    gal = GaloisGroupTable(field, tuple(images), tuple(perms),
                           tuple(matrices), tuple(comp), tuple(inv))
    return gal


def _root_permutation(field, g, table):
    n = field.degree
    with workprec(table.precision + 32):
        coeffs = [ball.Ball.exact_rational(c) for c in g.coords]
        perm = []
        for i in range(n):
            val = ball.eval_poly(coeffs, table.roots[i])
            hits = [k for k in range(n) if not val.disjoint(table.roots[k])]
            if len(hits) != 1:
                return None
            perm.append(hits[0])
    if sorted(perm) != list(range(n)):
        return None
    return perm


@dataclass
class PlacePairing:
    s: int                      # number of infinite places = n/2
    pairs: tuple                # per place: (i, ibar) root indices, im(root_i) > 0
    conj_involutions: tuple     # per place: automorphism index acting as conjugation
    place_of_root: tuple        # root index -> place index
    place_action: tuple         # place_action[sigma][place] -> place index


def infinite_places(field, table, gal):
    """Pair conjugate roots into places and identify, per place, the
    automorphism acting as complex conjugation there."""
    n = field.degree
    with workprec(table.precision + 32):
        partner = [None] * n
        for i in range(n):
            conj_ball = table.roots[i].conjugate()
            hits = [k for k in range(n) if not conj_ball.disjoint(table.roots[k])]
            if len(hits) != 1:
                raise PrecisionExhausted("ambiguous conjugate pairing; refine table")
            partner[i] = hits[0]
        for i in range(n):
            if partner[i] == i:
                raise NotTotallyComplex(
                    f"{field.label or 'field'}: root {i} is real")
            if partner[partner[i]] != i:
                raise PrecisionExhausted("conjugation is not an involution on roots")
        pairs = []
        seen = set()
        for i in range(n):
            if i in seen:
                continue
            j = partner[i]
            seen.add(i)
            seen.add(j)
            first = i if mpf(table.roots[i].mid.imag) > 0 else j
            pairs.append((first, partner[first]))
    place_of_root = [None] * n
    for p, (i, j) in enumerate(pairs):
        place_of_root[i] = p
        place_of_root[j] = p

    conj_invs = []
    for (i, j) in pairs:
        found = None
        for a in range(gal.order):
            if gal.perms[a][i] == j and gal.perms[a][j] == i:
                if gal.comp[a][a] == 0:
                    found = a
                    break
        if found is None:
            raise NotGalois("no conjugation involution found for a place")
        conj_invs.append(found)

    # Galois action on places: ||sigma(x)||_nu = ||x||_{nu'} with
    # nu' = place of perm_sigma(root of nu).
    action = []
    for a in range(gal.order):
        row = []
        for p, (i, j) in enumerate(pairs):
            pi, pj = place_of_root[gal.perms[a][i]], place_of_root[gal.perms[a][j]]
            if pi != pj:
                raise NotGalois("automorphism does not respect conjugate pairs")
            row.append(pi)
        action.append(tuple(row))

    return PlacePairing(len(pairs), tuple(pairs), tuple(conj_invs),
                        tuple(place_of_root), tuple(action))


def conjugate_slot(places, gal, place, sigma):
    """Slot index paired with sigma under conjugation at the given place:
    the automorphism c_nu o sigma."""
    c = places.conj_involutions[place]
    return gal.compose(c, sigma)
