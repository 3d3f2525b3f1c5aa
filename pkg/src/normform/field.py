"""Exact arithmetic in K = Q[t]/(f): elements as rational coordinate
vectors over the power basis, norms via resultants, minimal polynomials
by exact linear algebra, and certified complex embeddings.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
from mpmath import mpf, workprec

from . import ball, modp
from .errors import InvalidInput, PrecisionExhausted, ValidationError, ZeroElement

DEFAULT_PRECISION = 256


def default_precision():
    import os

    return int(os.environ.get("NORMFORM_PRECISION_BITS", DEFAULT_PRECISION))


# ---------------------------------------------------------------------------
# Rational polynomial helpers (tuples of Fraction, constant term first)

def poly_trim(p):
    n = len(p)
    while n and not p[n - 1]:
        n -= 1
    return tuple(p[:n])


def poly_add(a, b):
    n = max(len(a), len(b))
    a = tuple(a) + (Fraction(0),) * (n - len(a))
    b = tuple(b) + (Fraction(0),) * (n - len(b))
    return poly_trim([x + y for x, y in zip(a, b)])


def poly_mul(a, b):
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return poly_trim(out)


def poly_divmod(a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db, lead = len(b) - 1, b[-1]
    q = [Fraction(0)] * max(0, len(a) - db)
    while len(a) - 1 >= db and any(a):
        if not a[-1]:
            a.pop()
            continue
        c = a[-1] / lead
        shift = len(a) - 1 - db
        q[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] -= c * bi
        a.pop()
    return poly_trim(q), poly_trim(a)


def poly_gcd(a, b):
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if a:
        a = tuple(c / a[-1] for c in a)
    return a


def poly_xgcd(a, b):
    """(g, s, t) with s*a + t*b = g, g monic."""
    r0, r1 = poly_trim(a), poly_trim(b)
    s0, s1 = (Fraction(1),), ()
    t0, t1 = (), (Fraction(1),)
    while r1:
        q, r = poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, poly_add(s0, tuple(-c for c in poly_mul(q, s1)))
        t0, t1 = t1, poly_add(t0, tuple(-c for c in poly_mul(q, t1)))
    if r0:
        lead = r0[-1]
        r0 = tuple(c / lead for c in r0)
        s0 = tuple(c / lead for c in s0)
        t0 = tuple(c / lead for c in t0)
    return r0, s0, t0


def poly_derivative(p):
    return poly_trim([c * i for i, c in enumerate(p)][1:])


def resultant(f, g):
    """Res(f, g) normalized so that for monic f it equals prod g(alpha_i)
    over the roots of f."""
    f = poly_trim(f)
    g = poly_trim(g)
    if len(f) - 1 < 1:
        raise InvalidInput("resultant needs deg f >= 1")
    if not g:
        return Fraction(0)
    res = Fraction(1)
    # Euclidean descent: Res(f,g) = lc(g)^(df-dr) * (-1)^(df*dg) * Res(g,r).
    sign = 1
    while True:
        df, dg = len(f) - 1, len(g) - 1
        if dg == 0:
            res *= g[0] ** df
            break
        _q, r = poly_divmod(f, g)
        if not r:
            return Fraction(0)
        dr = len(r) - 1
        res *= g[-1] ** (df - dr)
        if (df * dg) % 2 == 1:
            sign = -sign
        f, g = g, r
    return sign * res


# ---------------------------------------------------------------------------


class NumberFieldDesc:
    """Monic squarefree integer defining polynomial plus a label."""

    def __init__(self, min_poly, label=""):
        self.min_poly = tuple(int(c) for c in min_poly)
        self.label = label
        if len(self.min_poly) < 3:
            raise ValidationError("degree must be at least 2")
        if self.min_poly[-1] != 1:
            raise ValidationError("defining polynomial must be monic")
        self.degree = len(self.min_poly) - 1
        self._min_poly_frac = tuple(Fraction(c) for c in self.min_poly)
        self._reduction_table = self._build_reduction_table()
        self._zero = None
        self._one = None
        self._theta = None

    def _build_reduction_table(self):
        # coords of t^(n+j) for j = 0..n-2, reduced mod f
        n = self.degree
        table = []
        cur = [-Fraction(c) for c in self._min_poly_frac[:-1]]  # t^n
        table.append(tuple(cur))
        for _ in range(n - 2):
            top = cur[-1]
            shifted = [Fraction(0)] + cur[:-1]
            cur = [shifted[i] + top * table[0][i] for i in range(n)]
            table.append(tuple(cur))
        return table

    def validate(self, galois_screen=True):
        """Squarefreeness, no rational roots, and a mod-p factor screen."""
        f = self._min_poly_frac
        if len(poly_gcd(f, poly_derivative(f))) > 1:
            raise ValidationError(f"{self.label or 'field'}: polynomial is not squarefree")
        for num in _divisors(abs(self.min_poly[0])) | {0}:
            for sgn in (1, -1):
                x = Fraction(sgn * num)
                if sum(c * x ** i for i, c in enumerate(f)) == 0:
                    raise ValidationError(f"rational root {sgn * num} found")
        if galois_screen:
            self._modp_screen()
        return True

    def _modp_screen(self):
        # Heuristic: an irreducible polynomial of a Galois field factors mod a
        # good prime into irreducibles of equal degree.  Three good primes all
        # showing mixed degrees means the downstream table build will fail.
        patterns = []
        p = 2
        while len(patterns) < 3 and p < 10_000:
            p = modp._next_prime(p)
            if self.min_poly[-1] % p == 0 or not modp.is_squarefree(self.min_poly, p):
                continue
            patterns.append(modp.distinct_degree_pattern(self.min_poly, p))
        if len(patterns) == 3 and all(len(set(pat)) > 1 for pat in patterns):
            raise ValidationError(
                f"{self.label or 'field'}: mod-p degree screen rejects the polynomial "
                f"(patterns {patterns}); expected equal-degree factorizations")

    # element constructors ---------------------------------------------------

    def element(self, coords):
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != self.degree:
            raise InvalidInput(
                f"coordinate vector has length {len(coords)}, expected {self.degree}")
        return NFElement(self, coords)

    def from_rational(self, q):
        return self.element((Fraction(q),) + (Fraction(0),) * (self.degree - 1))

    def zero(self):
        if self._zero is None:
            self._zero = self.from_rational(0)
        return self._zero

    def one(self):
        if self._one is None:
            self._one = self.from_rational(1)
        return self._one

    def theta(self):
        if self._theta is None:
            coords = [Fraction(0)] * self.degree
            coords[1] = Fraction(1)
            self._theta = self.element(coords)
        return self._theta

    def __repr__(self):
        return f"NumberFieldDesc({self.label or self.min_poly}, n={self.degree})"

    def __eq__(self, other):
        return isinstance(other, NumberFieldDesc) and self.min_poly == other.min_poly

    def __hash__(self):
        return hash(self.min_poly)


def _divisors(n):
    if n == 0:
        return set()
    out = set()
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.add(d)
            out.add(n // d)
        d += 1
    return out


class NFElement:
    """Field element as an exact rational coordinate vector over the power
    basis 1, t, ..., t^(n-1)."""

    __slots__ = ("field", "coords", "_hash")

    def __init__(self, field, coords):
        self.field = field
        self.coords = coords
        self._hash = None

    def __bool__(self):
        return any(self.coords)

    def __eq__(self, other):
        if not isinstance(other, NFElement):
            if isinstance(other, (int, Fraction)):
                other = self.field.from_rational(other)
            else:
                return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coords)
        return self._hash

    def __repr__(self):
        return f"NFElement{self.coords}"

    def __add__(self, other):
        other = self._coerce(other)
        return NFElement(self.field,
                         tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return NFElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        n = self.field.degree
        prod = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if b:
                    prod[i + j] += a * b
        out = list(prod[:n])
        table = self.field._reduction_table
        for j in range(n, 2 * n - 1):
            c = prod[j]
            if c:
                row = table[j - n]
                for i in range(n):
                    out[i] += c * row[i]
        return NFElement(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroElement("division by the zero element")
        g, s, _t = poly_xgcd(poly_trim(self.coords), self.field._min_poly_frac)
        if len(g) != 1:
            raise InvalidInput("element is a zero divisor; polynomial not squarefree?")
        inv = list(s) + [Fraction(0)] * (self.field.degree - len(s))
        scale = g[0]
        return NFElement(self.field, tuple(c / scale for c in inv[:self.field.degree]))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def _coerce(self, other):
        if isinstance(other, NFElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        raise TypeError(f"cannot coerce {type(other)} into the field")

    def as_rational(self):
        if any(self.coords[1:]):
            return None
        return self.coords[0]

    def poly(self):
        return poly_trim(self.coords)

    def denominator_lcm(self):
        out = 1
        for c in self.coords:
            out = out * c.denominator // math.gcd(out, c.denominator)
        return out


def nf_arith(a, b, op):
    """Dispatcher form of the ring/field operations."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise InvalidInput(f"unknown operation {op!r}")


def nf_norm(a):
    """Field norm, exactly, as Res(f, representative of a)."""
    p = a.poly()
    if not p:
        return Fraction(0)
    return resultant(a.field._min_poly_frac, p)


def minimal_polynomial(a):
    """Primitive integer minimal polynomial of a over Q, positive leading
    coefficient, found by exact linear algebra on powers of a."""
    from . import linalg

    field = a.field
    n = field.degree
    powers = [field.one()]
    for _ in range(n):
        powers.append(powers[-1] * a)
    for d in range(1, n + 1):
        # Is a^d a rational combination of lower powers?
        rows = [[powers[j].coords[i] for j in range(d)] for i in range(n)]
        rhs = [powers[d].coords[i] for i in range(n)]
        sol = linalg.solve_exact(rows, rhs)
        if sol is not None:
            coeffs = [-c for c in sol] + [Fraction(1)]
            return _make_primitive(coeffs)
    raise InvalidInput("unreachable: element has no minimal polynomial")


def _make_primitive(coeffs):
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, abs(c))
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return tuple(ints)


def absolute_height(a, precision=None):
    """(value, err): absolute logarithmic height of a with a certified
    error bound at most 2^(-precision/2)."""
    if not a:
        raise ZeroElement("height of the zero element")
    precision = precision or default_precision()
    minpoly = minimal_polynomial(a)
    deg = len(minpoly) - 1
    target = mpf(2) ** (-(precision // 2))
    work = precision + 64
    for _ in range(5):
        with workprec(work):
            roots = ball.isolate_roots(minpoly, work)
            total_lo = mpmath.log(abs(minpoly[-1]))
            total_hi = total_lo
            for r in roots:
                lo, hi = r.abs_bounds()
                if hi <= 1:
                    continue
                if lo < 1:
                    lo = mpf(1)
                total_lo += mpmath.log(lo) * (1 - ball._slop())
                total_hi += mpmath.log(hi) * (1 + ball._slop())
            value = (total_lo + total_hi) / (2 * deg)
            err = (total_hi - total_lo) / (2 * deg) + ball._slop()
            if err <= target:
                return value, err
        work *= 2
    raise PrecisionExhausted("height did not certify at requested precision")


class EmbeddingTable:
    """Certified balls around the roots of the defining polynomial, in a
    canonical order (positive-imaginary representative first inside each
    conjugate pair; pairs sorted by midpoint)."""

    def __init__(self, field, precision, roots):
        self.field = field
        self.precision = precision
        self.roots = roots

    @classmethod
    def build(cls, field, precision=None):
        precision = precision or default_precision()
        raw = ball.isolate_roots(field.min_poly, precision)
        with workprec(precision + 32):
            order = sorted(
                range(len(raw)),
                key=lambda i: (mpf(raw[i].mid.real), -abs(mpf(raw[i].mid.imag)),
                               -mpf(raw[i].mid.imag)))
        return cls(field, precision, [raw[i] for i in order])

    def refined(self, precision):
        """New table at higher precision; balls nest inside the old ones."""
        roots = ball.refine_roots(self.field.min_poly, self.roots, precision)
        return EmbeddingTable(self.field, precision, roots)


def embed(a, table):
    """sigma_1(a)..sigma_n(a) as certified balls, ordered like table.roots."""
    prec = table.precision
    with workprec(prec + 32):
        coeffs = [ball.Ball.exact_rational(c) for c in a.coords]
        out = [ball.eval_poly(coeffs, r) for r in table.roots]
        limit = mpf(2) ** (-(prec // 2))
        for b in out:
            scale = max(mpf(1), abs(b.mid))
            if b.rad > scale * limit * 2 ** 16:
                raise PrecisionExhausted(
                    "embedding radius too large; refine the table")
    return out
