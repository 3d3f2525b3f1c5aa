"""Vanishing-subsum families: solving two-term twisted unit equations
u = eta * tau(u) in exponent space, verifying candidate families against
the full relation system by exact character grouping, and expanding
family members into coefficient boxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
from mpmath import mpf, workprec

from . import linalg
from .errors import NotAUnit, NotInSpan
from .field import embed
from .galois import apply_automorphism
from .units import ExponentVector, unit_discrete_log, unit_from_exponents


def automorphism_exponent_action(sigma, ug, gal, table, places, prec=None):
    """(t0, svec, M): sigma(zeta) = zeta^t0 and
    sigma(eps_i) = zeta^{svec[i]} * prod_l eps_l^{M[l][i]}, all exact."""
    key = ("expaction", id(gal), sigma)
    got = ug._caches.get(key)
    if got is not None:
        return got
    zpow = ug.zeta_power_index()
    img = apply_automorphism(sigma, ug.zeta, gal)
    t0 = zpow.get(img.coords)
    if t0 is None:
        raise NotInSpan("sigma(zeta) is not a power of zeta")
    svec = []
    cols = []
    for eps in ug.fund_units:
        e = unit_discrete_log(apply_automorphism(sigma, eps, gal),
                              ug, table, places, prec or table.precision)
        svec.append(e.k)
        cols.append(e.a)
    r = ug.rank
    m = [[cols[i][l] for i in range(r)] for l in range(r)]
    got = (t0, tuple(svec), m)
    ug._caches[key] = got
    return got


@dataclass
class TwistedSolutionSet:
    """Solutions of u = eta * tau(u) as a coset: base * <generators>."""
    base: ExponentVector
    generators: tuple                # ExponentVectors spanning the subgroup
    lin_rows: tuple                  # ((coeffs over a), rhs) equalities
    congruence: tuple                # (k_coeff, (s over a), rhs, modulus)


def solve_twisted(eta, tau, ug, gal, table, places, prec=None):
    """Exponent-space solutions of u = eta * tau(u); None when eta is not
    a unit or the system is inconsistent."""
    prec = prec or table.precision
    try:
        e_eta = unit_discrete_log(eta, ug, table, places, prec)
    except (NotAUnit, NotInSpan):
        return None
    t0, svec, m = automorphism_exponent_action(tau, ug, gal, table, places, prec)
    r = ug.rank
    w = ug.w
    # unknowns (k, a_1..a_r, l):
    # (1 - t0) k - sum_i svec_i a_i - w l = e_eta.k
    # (I - M) a = e_eta.a
    rows = [[1 - t0] + [-svec[i] for i in range(r)] + [-w]]
    rhs = [e_eta.k]
    for l in range(r):
        rows.append([0] + [(1 if i == l else 0) - m[l][i] for i in range(r)] + [0])
        rhs.append(e_eta.a[l])
    sol = linalg.solve_diophantine(rows, rhs)
    if sol is None:
        return None
    part, kernel = sol
    base = ExponentVector(part[0] % w, tuple(part[1:1 + r]))
    gens = []
    for v in kernel:
        k_part, a_part = v[0], tuple(v[1:1 + r])
        if not any(a_part) and k_part % w == 0:
            continue  # acts trivially on the unit group
        gens.append(ExponentVector(k_part % w, a_part))
    free, tor = canonicalize_generators(_dedup_gens(gens), w)
    canonical = list(free)
    if tor < w:
        canonical.append(ExponentVector(tor, (0,) * r))
    lin_rows = tuple((tuple((1 if i == l else 0) - m[l][i] for i in range(r)),
                      e_eta.a[l]) for l in range(r))
    congruence = (1 - t0, tuple(-svec[i] for i in range(r)), e_eta.k, w)
    return TwistedSolutionSet(base, tuple(canonical), lin_rows, congruence)


def _dedup_gens(gens):
    seen = set()
    out = []
    for g in gens:
        key = g.key()
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


def canonicalize_generators(gens, w):
    """Split a generator list for a subgroup of (Z/w) x Z^r into free
    generators whose exponent parts are a lattice basis (so their log
    images are independent) plus a single torsion generator order.

    Returns (free_gens, torsion_modulus g) with the subgroup equal to
    <free_gens> * <zeta^g>; g = w when the torsion part is trivial.
    """
    gens = [g for g in gens if any(g.a) or g.k % w]
    r = len(gens[0].a) if gens else 0
    if not gens:
        return (), w
    # torsion part: k-values of combinations with vanishing exponent part
    rows = [[g.a[i] for g in gens] for i in range(r)]
    tor = w
    if rows:
        for combo in linalg.integer_kernel(rows):
            k_val = sum(c * g.k for c, g in zip(combo, gens))
            import math

            tor = math.gcd(tor, k_val % w)
    else:
        import math

        for g in gens:
            tor = math.gcd(tor, g.k % w)
        return (), (tor if tor else w)
    if tor == 0:
        tor = w
    # free part: triangular basis of the exponent-part lattice, lifted
    # back into the subgroup (basis rows are integer combos of the gens)
    a_rows = [list(g.a) for g in gens]
    basis = _integer_row_basis(a_rows)
    free = []
    for b in basis:
        combo = linalg.solve_diophantine(rows, list(b))
        assert combo is not None, "basis row escaped the generator span"
        coeffs = combo[0]
        k_val = sum(c * g.k for c, g in zip(coeffs, gens)) % w
        free.append(ExponentVector(k_val, tuple(b)))
    return tuple(free), tor


def _integer_row_basis(rows):
    """Basis of the integer row span (HNF rows, zero rows dropped)."""
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return []
    ncols = len(mat[0])
    basis = []
    work = [r[:] for r in mat]
    col = 0
    row = 0
    while col < ncols and row < len(work):
        piv = None
        for i in range(row, len(work)):
            if work[i][col]:
                if piv is None or abs(work[i][col]) < abs(work[piv][col]):
                    piv = i
        if piv is None:
            col += 1
            continue
        work[row], work[piv] = work[piv], work[row]
        again = False
        for i in range(row + 1, len(work)):
            if work[i][col]:
                q = work[i][col] // work[row][col]
                work[i] = [x - q * y for x, y in zip(work[i], work[row])]
                if work[i][col]:
                    again = True
        if again:
            continue
        row += 1
        col += 1
    return [r for r in work[:row] if any(r)]


@dataclass
class SolutionFamily:
    """Solutions parameterized by unit exponents subject to integer-linear
    conditions plus a torsion congruence: members are
    mu * unit(base) * prod_p unit(gen_p)^{t_p}."""
    mu: object                     # NFElement
    base: ExponentVector
    sigma: int                     # automorphism of the defining subsum
    pair: tuple                    # slot pair (j, j') the subsum vanished at
    generators: tuple              # ExponentVector per free direction
    linear_conditions: tuple       # ((coeffs over a), rhs, modulus|None)
    congruence: tuple              # (k_coeff, (coeffs over a), rhs, modulus)
    verified: bool = False
    mu_index: int = 0

    def key(self):
        return (self.mu.coords, self.base.key(),
                tuple(g.key() for g in sorted(self.generators, key=lambda g: g.key())))

    def is_infinite(self):
        return any(any(g.a) for g in self.generators)

    def contains(self, e, ug):
        """Exact membership of an exponent vector."""
        r = len(self.base.a)
        cols = []
        for g in self.generators:
            cols.append([g.k] + list(g.a))
        cols.append([ug.w] + [0] * r)
        mat = [[cols[j][i] for j in range(len(cols))] for i in range(r + 1)]
        delta = [e.k - self.base.k] + [e.a[i] - self.base.a[i] for i in range(r)]
        return linalg.solve_diophantine(mat, delta) is not None

    def member(self, ts, ug):
        """Exact member for integer parameters ts (one per generator)."""
        e = self.base
        out = unit_from_exponents(e, ug)
        for g, t in zip(self.generators, ts):
            if t:
                out = out * unit_from_exponents(g, ug) ** t
        return self.mu * out

    def to_dict(self):
        return {
            "mu": [_frac_str(c) for c in self.mu.coords],
            "base": {"torsion": self.base.k, "exponents": list(self.base.a)},
            "sigma": self.sigma,
            "pair": list(self.pair),
            "generators": [{"torsion": g.k, "exponents": list(g.a)}
                           for g in self.generators],
            "linear_conditions": [
                {"coeffs": list(c), "rhs": rhs, "modulus": None}
                for (c, rhs) in self.linear_conditions],
            "congruence": {"torsion_coeff": self.congruence[0],
                           "coeffs": list(self.congruence[1]),
                           "rhs": self.congruence[2],
                           "modulus": self.congruence[3]},
            "verified": self.verified,
            "mu_index": self.mu_index,
        }


def _frac_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def two_term_family(c_l, slot_l, c_k, slot_k, mu, ug, gal, table, places,
                    prec=None, mu_index=0):
    """Family from the vanishing subsum c_l sigma_l(u) + c_k sigma_k(u) = 0,
    not yet verified against the rest of the system."""
    inv_l = gal.inverse(slot_l)
    tau = gal.compose(inv_l, slot_k)
    if tau == 0:
        # same automorphism twice: c_l u + c_k u = 0 has unit solutions only
        # if c_l + c_k = 0, in which case every unit solves the subsum
        if c_l + c_k:
            return None
        sol = solve_twisted(ug.field.one(), 0, ug, gal, table, places, prec)
    else:
        ratio = -(apply_automorphism(inv_l, c_k / c_l, gal))
        sol = solve_twisted(ratio, tau, ug, gal, table, places, prec)
    if sol is None:
        return None
    return SolutionFamily(
        mu=mu, base=sol.base, sigma=tau, pair=(slot_l, slot_k),
        generators=sol.generators,
        linear_conditions=tuple((c, rhs, None) for (c, rhs) in sol.lin_rows),
        congruence=sol.congruence, mu_index=mu_index)


def solve_two_term(a, slot_u, b, slot_v, ug, gal, table, places, prec=None):
    """Spec-shaped front end: families solving a*sigma_u(x) + b*sigma_v(x) = 0;
    empty list when the coefficient ratio is not a unit."""
    fam = two_term_family(a, slot_u, b, slot_v, ug.field.one(), ug, gal,
                          table, places, prec)
    return [fam] if fam is not None else []


def extract_families(subsum, u0, mu, ug, gal, table, places, prec=None):
    """Family through a known particular solution u0 of the subsum
    (a, b, sigma): a*x + b*sigma(x) = 0."""
    a, b, sigma = subsum
    fam = two_term_family(a, 0, b, sigma, mu, ug, gal, table, places, prec)
    if fam is None:
        raise NotInSpan("subsum admits no family despite a particular solution")
    if not fam.contains(u0, ug):
        raise NotInSpan("claimed particular solution does not satisfy the subsum")
    return SolutionFamily(mu=fam.mu, base=u0, sigma=fam.sigma, pair=fam.pair,
                          generators=fam.generators,
                          linear_conditions=fam.linear_conditions,
                          congruence=fam.congruence, verified=fam.verified)


# ---------------------------------------------------------------------------
# Verification against the full system by character grouping


def family_term_groups(family, row_coeffs, ug, gal):
    """Group the row terms c_j sigma_j(u_base * prod G^t) by the exact tuple
    of generator images; the row vanishes identically on the family iff
    every group sums to zero."""
    base_u = unit_from_exponents(family.base, ug)
    gen_units = [unit_from_exponents(g, ug) for g in family.generators]
    groups = {}
    for j, c in enumerate(row_coeffs):
        if not c:
            continue
        coef = c * apply_automorphism(j, base_u, gal)
        charkey = tuple(apply_automorphism(j, g, gal).coords for g in gen_units)
        cur = groups.get(charkey)
        groups[charkey] = coef if cur is None else cur + coef
    return groups


def verify_family_rows(family, rows_coeffs, ug, gal, table, places, prec=None):
    """True when every system row vanishes identically on the family.
    When a row reduces to exactly two nonzero character groups, descend:
    restrict the family to the sublattice where the two groups cancel and
    re-verify.  Returns (family or None, fully_verified flag)."""
    fam = family
    for _depth in range(4):
        pending = None
        for coeffs in rows_coeffs:
            groups = family_term_groups(fam, coeffs, ug, gal)
            nonzero = {k: v for k, v in groups.items() if v}
            if not nonzero:
                continue
            if len(nonzero) == 1:
                return None, True     # row can never vanish on this family
            if len(nonzero) == 2 and fam.generators:
                pending = nonzero
                break
            return fam, False         # >= 3 groups: not identically zero
        else:
            fam.verified = True
            return fam, True
        fam = _descend_two_groups(fam, pending, ug, gal, table, places, prec)
        if fam is None:
            return None, True
    return fam, False


def _descend_two_groups(family, groups, ug, gal, table, places, prec):
    """Restrict the family so that G1 * w1^t + G2 * w2^t = 0 identically:
    (w1/w2)^t = -G2/G1 pins t to an affine sublattice."""
    (key1, g1), (key2, g2) = list(groups.items())
    d = len(family.generators)
    try:
        target = unit_discrete_log(-(g2 / g1), ug, table, places, prec)
        ratios = []
        for p in range(d):
            w1 = ug.field.element(key1[p])
            w2 = ug.field.element(key2[p])
            ratios.append(unit_discrete_log(w1 / w2, ug, table, places, prec))
    except (NotAUnit, NotInSpan):
        return None
    r = ug.rank
    w = ug.w
    # sum_p t_p * ratio_p = target  in (Z/w) x Z^r, with a slack torsion var
    rows = [[ratios[p].k for p in range(d)] + [w]]
    rhs = [target.k]
    for i in range(r):
        rows.append([ratios[p].a[i] for p in range(d)] + [0])
        rhs.append(target.a[i])
    sol = linalg.solve_diophantine(rows, rhs)
    if sol is None:
        return None
    part, kernel = sol
    t_base = part[:d]
    new_base_unit = list(family.base.a)
    new_base = family.base
    for p, t in enumerate(t_base):
        if t:
            g = family.generators[p]
            new_base = ExponentVector(
                (new_base.k + t * g.k) % w,
                tuple(new_base.a[i] + t * g.a[i] for i in range(r)))
    new_gens = []
    for v in kernel:
        tvec = v[:d]
        if not any(tvec):
            continue
        k_acc = 0
        a_acc = [0] * r
        for p, t in enumerate(tvec):
            g = family.generators[p]
            k_acc += t * g.k
            for i in range(r):
                a_acc[i] += t * g.a[i]
        if not any(a_acc) and k_acc % w == 0:
            continue
        new_gens.append(ExponentVector(k_acc % w, tuple(a_acc)))
    free, tor = canonicalize_generators(_dedup_gens(new_gens), w)
    canonical = list(free)
    if tor < w:
        canonical.append(ExponentVector(tor, (0,) * r))
    return SolutionFamily(
        mu=family.mu, base=new_base, sigma=family.sigma, pair=family.pair,
        generators=tuple(canonical),
        linear_conditions=family.linear_conditions,
        congruence=family.congruence, mu_index=family.mu_index)


# ---------------------------------------------------------------------------
# Expanding family members into a coefficient box


def family_members_in_box(family, span, bounds, m_eff, ug, gal, table, places,
                          prec=None):
    """Exact x-vectors of family members inside the coefficient box."""
    prec = prec or table.precision
    free = [g for g in family.generators if any(g.a)]
    torsion_gens = [g for g in family.generators if not any(g.a)]
    with workprec(prec + 32):
        caps = []
        for (i, _b) in places.pairs:
            cap = mpf(0)
            for al, b in zip(span.alphas, bounds):
                lo, hi = embed(al, table)[i].abs_bounds()
                cap += hi * b
            caps.append(2 * mpmath.log(max(cap, mpf("1e-9"))))
        total_cap = sum(caps)
        mu_balls = embed(family.mu, table)
        lam_boxes = []
        for p_idx, (i, _b) in enumerate(places.pairs):
            lo, hi = mu_balls[i].abs_bounds()
            mu_l = mpmath.log(lo) + mpmath.log(hi)
            upper = caps[p_idx] - mu_l
            lower = (mpmath.log(mpf(abs(m_eff))) - (total_cap - caps[p_idx])) - mu_l
            lam_boxes.append((lower, upper))
        base_u = unit_from_exponents(family.base, ug)
        from .units import log_embedding

        base_lam, _err = log_embedding(base_u * ug.field.one(), table, places, prec)
        t_bounds = _solve_t_box(free, lam_boxes, base_lam, ug, table, places, prec)
    if t_bounds is None:
        return []
    out = set()
    tor_range = [range(0, 1)]
    combos = [[]]
    for g in torsion_gens:
        order = ug.w // _gcd(g.k, ug.w) if g.k else 1
        combos = [c + [t] for c in combos for t in range(order)]
    grid = [[]]
    for tb in t_bounds:
        grid = [g + [t] for g in grid for t in range(-tb, tb + 1)]
    for ts in grid:
        for tor in combos:
            beta = family.member(list(ts) + list(tor), ug)
            if not span.in_span(beta):
                continue
            x = span.coordinates(beta)
            if x is None:
                continue
            if any(xi.denominator != 1 for xi in x):
                continue
            xi = tuple(int(v) for v in x)
            if all(abs(v) <= b for v, b in zip(xi, bounds)):
                out.add(xi)
    return sorted(out)


def _gcd(a, b):
    import math

    return math.gcd(abs(a), b)


def _solve_t_box(free, lam_boxes, base_lam, ug, table, places, prec):
    """Integer ranges for the free parameters so every member with log
    vector inside the box is covered (over-approximation is fine)."""
    if not free:
        return []
    from .units import log_embedding

    with workprec(prec + 32):
        cols = []
        for g in free:
            u = unit_from_exponents(g, ug)
            lam, _err = log_embedding(u, table, places, prec)
            cols.append([float(v) for v in lam])
        import numpy as np

        a = np.array(cols, dtype=float).T      # s x d
        center = np.array([float((lo + hi) / 2 - bl)
                           for (lo, hi), bl in zip(lam_boxes, base_lam)])
        radius = np.array([float((hi - lo) / 2) for (lo, hi) in lam_boxes])
        pinv = np.linalg.pinv(a)
        t_center = pinv @ center
        t_radius = np.abs(pinv) @ radius
        out = []
        for c, rad in zip(t_center, t_radius):
            out.append(int(np.ceil(abs(c) + rad + 2)))
        if any(b > 10_000 for b in out):
            return None
    return out
