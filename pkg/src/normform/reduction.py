"""Problem normalization to integral coefficients, the conjugate matrix B
and relation matrix A, enumeration of norm representatives up to units,
and the per-representative scaled systems.

The solver-side exact norm evaluation here expands the norm form as a
polynomial through the Galois conjugates; the oracle module deliberately
evaluates norms by a different route (split-prime resultants) so the two
never share a code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mpf, workprec

from . import linalg
from .errors import CapExceeded, InvalidInput, RankDefect, ValidationError
from .field import NFElement, embed
from .galois import apply_automorphism
from .units import unit_discrete_log, unit_from_exponents


@dataclass
class NormFormProblem:
    field: object
    alphas: tuple       # NFElements
    m: int

    @property
    def k(self):
        return len(self.alphas)


def validate_problem(p, gal):
    """Q-linear independence of the alphas and the generation condition:
    only the identity automorphism fixes all ratios alpha_j/alpha_1."""
    k = p.k
    coord_matrix = linalg.Matrix([[a.coords[i] for a in p.alphas]
                                  for i in range(p.field.degree)])
    if linalg.rank(coord_matrix) != k:
        raise ValidationError("alphas are Q-linearly dependent")
    if p.m == 0:
        raise ValidationError("m must be nonzero")
    base = next(a for a in p.alphas if a)
    ratios = [a / base for a in p.alphas]
    for s in range(1, gal.order):
        if all(apply_automorphism(s, r, gal) == r for r in ratios):
            raise ValidationError(
                f"ratios are fixed by automorphism {s}; they do not generate the field")
    return True


def normalize_problem(p):
    """(p', d, m_eff): scale the alphas into Z[theta] by the least positive
    integer d; solutions transport unchanged with target m * d^n."""
    d = 1
    for a in p.alphas:
        da = a.denominator_lcm()
        d = d * da // math.gcd(d, da)
    if d == 1:
        return p, 1, p.m
    scaled = tuple(a * d for a in p.alphas)
    m_eff = p.m * d ** p.field.degree
    return NormFormProblem(p.field, scaled, p.m), d, m_eff


@dataclass
class ReducedSystem:
    B: linalg.Matrix      # k x n over K, entries sigma_j(alpha_i)
    A: linalg.Matrix      # (n-k) x n over K, rows annihilate B's columns
    d: int
    m_eff: int


def build_B_and_A(p, gal, d=1, m_eff=None):
    n = p.field.degree
    k = p.k
    rows = []
    for a in p.alphas:
        rows.append([apply_automorphism(j, a, gal) for j in range(n)])
    B = linalg.Matrix(rows)
    if linalg.rank(B) != k:
        raise RankDefect(f"conjugate matrix has rank < {k}; dependent alphas")
    A = linalg.kernel_basis(B)
    if A.nrows != n - k:
        raise RankDefect("kernel dimension mismatch")
    for row in A.rows:
        for i in range(k):
            acc = p.field.zero()
            for j in range(n):
                acc = acc + B.rows[i][j] * row[j]
            if acc:
                raise RankDefect("A * B^T != 0")
    return ReducedSystem(B, A, d, m_eff if m_eff is not None else p.m)


def build_mu_systems(sys, reps, gal):
    """One (mu, A_mu) per representative; A_mu scales column j by sigma_j(mu)."""
    out = []
    for rep in reps:
        mu = rep.mu if hasattr(rep, "mu") else rep
        scaled = []
        images = [apply_automorphism(j, mu, gal) for j in range(sys.A.ncols)]
        for row in sys.A.rows:
            scaled.append([row[j] * images[j] for j in range(sys.A.ncols)])
        out.append((mu, linalg.Matrix(scaled)))
    return out


# ---------------------------------------------------------------------------
# Norm form as an expanded polynomial (solver-side exact evaluation)


class NormFormPoly:
    """N(x_1 a_1 + ... + x_k a_k) expanded exactly as a rational polynomial
    via the product of Galois-conjugate linear forms."""

    def __init__(self, coeffs, k, degree):
        self.coeffs = coeffs      # dict: exponent tuple -> Fraction
        self.k = k
        self.degree = degree
        den = 1
        for c in coeffs.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        self.den = den
        self.int_coeffs = {m: int(c * den) for m, c in coeffs.items()}

    @classmethod
    def from_conjugates(cls, field, gal, alphas):
        k = len(alphas)
        poly = {(0,) * k: field.one()}
        for j in range(gal.order):
            row = [apply_automorphism(j, a, gal) for a in alphas]
            nxt = {}
            for mono, coef in poly.items():
                for i, c in enumerate(row):
                    if not c:
                        continue
                    m2 = mono[:i] + (mono[i] + 1,) + mono[i + 1:]
                    cur = nxt.get(m2)
                    nxt[m2] = coef * c if cur is None else cur + coef * c
            poly = nxt
        out = {}
        for mono, coef in poly.items():
            q = coef.as_rational()
            if q is None:
                raise InvalidInput("norm form coefficient is not rational; "
                                   "is the table a full Galois group?")
            if q:
                out[mono] = q
        return cls(out, k, field.degree)

    def evaluate_point(self, x):
        total = Fraction(0)
        for mono, c in self.coeffs.items():
            term = c
            for xi, e in zip(x, mono):
                if e:
                    term *= Fraction(xi) ** e
            total += term
        return total

    def abs_bound(self, bounds):
        """Exact upper bound for |den * N| over the integer box."""
        total = 0
        for mono, c in self.int_coeffs.items():
            term = abs(c)
            for b, e in zip(bounds, mono):
                term *= max(1, b) ** e
            total += term
        return total

    def scan_box(self, bounds, target, cap=None, workers=1):
        """All integer vectors x with |x_i| <= bounds[i] and N(x) = target.
        Exact: int64 fast path guarded by an exact overflow bound, object
        dtype otherwise.  Deterministic output, sorted."""
        bounds = list(bounds)
        if len(bounds) != self.k:
            raise InvalidInput("bounds length mismatch")
        npoints = 1
        for b in bounds:
            npoints *= 2 * b + 1
        if cap is not None and npoints > cap:
            raise CapExceeded(f"box holds {npoints} points, cap {cap}")
        scaled_target = Fraction(target) * self.den
        if scaled_target.denominator != 1:
            return []
        scaled_target = int(scaled_target)
        use_i64 = self.abs_bound(bounds) < 2 ** 62 and abs(scaled_target) < 2 ** 62
        dtype = np.int64 if use_i64 else object

        # group monomials by the exponent of x_0
        by_e0 = {}
        for mono, c in self.int_coeffs.items():
            by_e0.setdefault(mono[0], []).append((mono[1:], c))

        rest_bounds = bounds[1:]
        rest_cols = _integer_grid(rest_bounds, dtype)
        nrest = rest_cols[0].shape[0] if rest_cols else 1

        q_arrays = {}
        for e0, monos in by_e0.items():
            acc = np.zeros(nrest, dtype=dtype)
            for mono, c in monos:
                term = np.full(nrest, c, dtype=dtype)
                for col, e in zip(rest_cols, mono):
                    if e == 1:
                        term = term * col
                    elif e:
                        term = term * col ** e
                acc = acc + term
            q_arrays[e0] = acc

        hits = []
        b0 = bounds[0]
        for x0 in range(-b0, b0 + 1):
            total = np.zeros(nrest, dtype=dtype)
            for e0 in sorted(q_arrays):
                if e0 == 0:
                    total = total + q_arrays[e0]
                else:
                    total = total + q_arrays[e0] * (x0 ** e0)
            idx = np.nonzero(total == scaled_target)[0]
            for i in idx:
                rest = tuple(int(col[i]) for col in rest_cols)
                hits.append((x0,) + rest)
        verified = []
        for x in hits:
            if self.evaluate_point(x) == Fraction(target):
                verified.append(x)
        return sorted(verified)


def _integer_grid(bounds, dtype):
    """Column arrays of the full integer grid prod [-b_i, b_i]."""
    if not bounds:
        return []
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    mesh = np.meshgrid(*ranges, indexing="ij")
    return [m.reshape(-1).astype(dtype, copy=False) for m in mesh]


# ---------------------------------------------------------------------------
# Norm representatives up to units


@dataclass(frozen=True)
class NormRepresentative:
    mu: object          # NFElement, reduced into the log-lattice fundamental
                        # domain and torsion-canonicalized


class SpanSolver:
    """Exact membership test and coordinate recovery for span_Q(alphas)."""

    def __init__(self, field, alphas):
        self.field = field
        self.alphas = alphas
        n = field.degree
        k = len(alphas)
        cols = [[a.coords[i] for a in alphas] for i in range(n)]  # n x k
        ct = linalg.Matrix([[cols[i][j] for i in range(n)] for j in range(k)])
        self.ann = linalg.kernel_basis(ct)     # rows annihilate the span
        gram = [[sum(cols[i][a] * cols[i][b] for i in range(n)) for b in range(k)]
                for a in range(k)]
        self.solve_rows = []
        for i in range(n):
            rhs = [cols[i][a] for a in range(k)]
            col = linalg.solve_exact(gram, rhs)
            self.solve_rows.append(col)  # S^T rows; x = S * beta

    def in_span(self, beta):
        for row in self.ann.rows:
            if sum(c * b for c, b in zip(row, beta.coords)):
                return False
        return True

    def coordinates(self, beta):
        """x with sum x_i alpha_i = beta, or None if beta is off the span."""
        k = len(self.alphas)
        x = [Fraction(0)] * k
        for i, b in enumerate(beta.coords):
            if b:
                row = self.solve_rows[i]
                for a in range(k):
                    x[a] += b * row[a]
        acc = self.field.zero()
        for xi, al in zip(x, self.alphas):
            acc = acc + al * xi
        if acc != beta:
            return None
        return x


def fundamental_domain_reduce(mu, ug, table, places, prec):
    """Multiply mu by a unit so its trace-free log vector lands in the
    fundamental parallelepiped of the unit lattice (up to rounding)."""
    from .units import log_embedding  # late import to avoid cycles

    r = ug.rank
    if r == 0:
        return mu
    balls = embed(mu, table)
    with workprec(prec + 32):
        lam = []
        for (i, _b) in places.pairs:
            lo, hi = balls[i].abs_bounds()
            lam.append(mpmath.log(lo) + mpmath.log(hi))
        mean = sum(lam) / len(lam)
        vec = mpmath.matrix([lam[j] - mean for j in range(r)])
        inv = ug.inv_square_matrix(table, places, prec)
        t = inv * vec
        shifts = [int(mpmath.nint(t[i])) for i in range(r)]
    out = mu
    for eps, ti in zip(ug.fund_units, shifts):
        if ti:
            out = out * eps ** (-ti)
    return out


def _canonical_key(coords):
    nnz = sum(1 for c in coords if c)
    top = max((i for i, c in enumerate(coords) if c), default=-1)
    return (nnz, top, coords)


def torsion_canonical(mu, ug):
    # -1 is always in the torsion orbit, so restricting to candidates with
    # positive leading coordinate loses nothing and fixes the sign.
    best = None
    cur = mu
    for _ in range(ug.w):
        lead = next((c for c in cur.coords if c), None)
        if lead is not None and lead > 0:
            key = _canonical_key(cur.coords)
            if best is None or key < best[0]:
                best = (key, cur)
        cur = cur * ug.zeta
    return best[1] if best else mu


def enumerate_norm_representatives(p, gal, table, places, ug,
                                   prec=None, cap=20_000_000, workers=1):
    """Complete list of norm-m_eff elements of Z[theta] up to units, one
    canonical representative per associate class.

    The search box: any class has a member whose trace-free log vector
    lies in the fundamental parallelepiped, so each |sigma(mu)| is at most
    |m_eff|^(1/n) * exp(diameter/4 in log||.|| scale); coordinates are
    bounded through the inverse embedding matrix with a 10% margin.
    """
    prec = prec or table.precision
    p_norm, d, m_eff = normalize_problem(p)
    if m_eff < 0:
        return []
    field = p.field
    n = field.degree
    if m_eff == 1:
        # norms are positive here and integral elements of norm 1 are
        # units, so the single associate class is that of 1
        return [NormRepresentative(field.one())]
    rows, _err = ug.log_matrix(table, places, prec)
    with workprec(prec + 32):
        diameter = sum(max(abs(v) for v in row) for row in rows) if rows else mpf(0)
        log_embed_bound = mpmath.log(mpf(abs(m_eff))) / (2 * places.s * 1) + diameter / 4
        radius = mpmath.exp(log_embed_bound)
        vmat = mpmath.matrix(n, n)
        for i in range(n):
            acc = mpmath.mpc(1)
            for l in range(n):
                vmat[i, l] = acc
                acc *= table.roots[i].mid
        vinv = vmat ** -1
        bounds = []
        for l in range(n):
            s = sum(abs(vinv[l, i]) for i in range(n))
            bounds.append(int(mpmath.floor(s * radius * mpf("1.1"))) + 1)
    power_basis = [field.theta() ** i for i in range(n)]
    nf_poly = NormFormPoly.from_conjugates(field, gal, power_basis)
    hits = nf_poly.scan_box(bounds, m_eff, cap=cap, workers=workers)

    reps = []
    for x in hits:
        mu = field.element([Fraction(c) for c in x])
        mu = fundamental_domain_reduce(mu, ug, table, places, prec)
        mu = torsion_canonical(mu, ug)
        for known in reps:
            if _associates(mu, known, ug, table, places, prec):
                break
        else:
            reps.append(mu)
    reps.sort(key=lambda m: _canonical_key(m.coords))
    return [NormRepresentative(mu) for mu in reps]


def _associates(a, b, ug, table, places, prec):
    q = a / b
    from .errors import NotAUnit, NotInSpan

    try:
        unit_discrete_log(q, ug, table, places, prec)
        return True
    except (NotAUnit, NotInSpan):
        return False
