"""Exact linear algebra over the rationals and over number fields.

Matrices are generic over any exact field scalar supporting +, -, *, /,
equality with 0 via truthiness (Fraction and NFElement both qualify).
Elimination is fraction-free (one-step Bareiss) with exact divisions,
normalized to reduced row echelon form at the end.

Also hosts the small integer toolbox the solvers need: Smith normal
form, integer kernels and particular solutions, and an exact LLL.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations


class Matrix:
    """Dense row-major exact matrix."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.ncols for r in self.rows):
            raise ValueError("ragged rows")

    @classmethod
    def zero_like(cls, value, nrows, ncols):
        z = value - value
        return cls([[z] * ncols for _ in range(nrows)])

    def copy(self):
        return Matrix([list(r) for r in self.rows])

    def transpose(self):
        return Matrix([[self.rows[i][j] for i in range(self.nrows)]
                       for j in range(self.ncols)])

    def col_submatrix(self, cols):
        return Matrix([[r[j] for j in cols] for r in self.rows])

    def mul_vec(self, v):
        return [sum((r[j] * v[j] for j in range(self.ncols)),
                    start=r[0] * v[0] - r[0] * v[0]) for r in self.rows]

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.rows == other.rows

    def __repr__(self):
        return f"Matrix({self.rows!r})"


def rref_fraction_free(m):
    """(R, pivots): reduced row echelon form by fraction-free elimination
    with exact division, pivots listed in order.  Ties in pivot selection
    take the lowest row index with a nonzero entry."""
    a = [list(r) for r in m.rows]
    nrows, ncols = m.nrows, m.ncols
    pivots = []
    prev = None  # previous pivot for Bareiss division
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if a[i][c]:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            a[r], a[pr] = a[pr], a[r]
        pivot = a[r][c]
        for i in range(nrows):
            if i == r or not a[i][c]:
                continue
            factor = a[i][c]
            for j in range(ncols):
                val = a[i][j] * pivot - factor * a[r][j]
                if prev is not None and i > r:
                    val = val / prev
                a[i][j] = val
        pivots.append(c)
        prev = pivot
        r += 1
        if r == nrows:
            break
    # normalize pivot rows to leading 1 and clear above (full RREF)
    for k, c in enumerate(pivots):
        pivot = a[k][c]
        a[k] = [x / pivot for x in a[k]]
    for k in reversed(range(len(pivots))):
        c = pivots[k]
        for i in range(k):
            factor = a[i][c]
            if factor:
                a[i] = [x - factor * y for x, y in zip(a[i], a[k])]
    return Matrix(a), pivots


def rank(m):
    return len(rref_fraction_free(m)[1])


def kernel_basis(m):
    """Rows span the right kernel {v : M v = 0}; exact."""
    red, pivots = rref_fraction_free(m)
    free = [c for c in range(m.ncols) if c not in pivots]
    if not m.rows:
        raise ValueError("kernel of an empty matrix")
    one = _one_like(m.rows[0][0])
    zero = one - one
    basis = []
    for fc in free:
        v = [zero] * m.ncols
        v[fc] = one
        for k, pc in enumerate(pivots):
            v[pc] = zero - red.rows[k][fc]
        basis.append(v)
    return Matrix(basis) if basis else Matrix([[]])


def _one_like(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(1)
    return x.field.one()


def column_subset_rank(m, cols):
    cols = list(cols)
    if len(set(cols)) != len(cols) or any(c < 0 or c >= m.ncols for c in cols):
        raise ValueError("column indices must be distinct and valid")
    return rank(m.col_submatrix(cols))


def check_rank_hypothesis(m, t, workers=1):
    """True iff every t-column subset has rank min(t, nrows); on failure
    returns (False, first failing subset in lexicographic order)."""
    if t > m.ncols:
        raise ValueError("t exceeds column count")
    want = min(t, m.nrows)
    for subset in combinations(range(m.ncols), t):
        if column_subset_rank(m, subset) != want:
            return False, subset
    return True, None


def solve_exact(rows, rhs):
    """Solve A x = b exactly over Fractions; None if inconsistent.
    A given as list of rows; must have full column rank for a unique answer."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    aug = Matrix([list(map(Fraction, rows[i])) + [Fraction(rhs[i])]
                  for i in range(nrows)])
    red, pivots = rref_fraction_free(aug)
    if ncols in pivots:
        return None  # inconsistent
    x = [Fraction(0)] * ncols
    for k, c in enumerate(pivots):
        x[c] = red.rows[k][ncols]
    # verify (guards against underdetermined systems)
    for i in range(nrows):
        if sum(Fraction(rows[i][j]) * x[j] for j in range(ncols)) != Fraction(rhs[i]):
            return None
    return x


def solve_field(matrix, rhs):
    """Like solve_exact but over any exact field (e.g. NFElement entries)."""
    aug = Matrix([list(matrix.rows[i]) + [rhs[i]] for i in range(matrix.nrows)])
    red, pivots = rref_fraction_free(aug)
    n = matrix.ncols
    if n in pivots:
        return None
    one = _one_like(matrix.rows[0][0])
    zero = one - one
    x = [zero] * n
    for k, c in enumerate(pivots):
        x[c] = red.rows[k][n]
    for i in range(matrix.nrows):
        acc = zero
        for j in range(n):
            acc = acc + matrix.rows[i][j] * x[j]
        if acc != rhs[i]:
            return None
    return x


# ---------------------------------------------------------------------------
# Integer lattice toolbox


def smith_normal_form(m):
    """(D, U, V) with U*M*V = D diagonal, U, V unimodular; all integer."""
    a = [[int(x) for x in row] for row in m]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    v = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def addmul_row(dst, src, c):
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def addmul_col(dst, src, c):
        for row in a:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while t < min(nr, nc):
        # find smallest nonzero entry in remaining block
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        dirty = False
        for i in range(t + 1, nr):
            if a[i][t]:
                q = a[i][t] // a[t][t]
                addmul_row(i, t, -q)
                if a[i][t]:
                    dirty = True
        for j in range(t + 1, nc):
            if a[t][j]:
                q = a[t][j] // a[t][t]
                addmul_col(j, t, -q)
                if a[t][j]:
                    dirty = True
        if dirty:
            continue
        # divisibility fix-up so diagonal divides later entries
        fixed = True
        for i in range(t + 1, nr):
            for j in range(t + 1, nc):
                if a[i][j] % a[t][t]:
                    addmul_row(t, i, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
                u[t] = [-x for x in u[t]]
            t += 1
    return a, u, v


def integer_kernel(m):
    """Basis (list of integer vectors) of {x in Z^ncols : M x = 0}."""
    d, _u, v = smith_normal_form(m)
    nc = len(m[0]) if m else 0
    nr = len(m)
    rk = sum(1 for i in range(min(nr, nc)) if d[i][i])
    return [[v[i][j] for i in range(nc)] for j in range(rk, nc)]


def solve_diophantine(m, b):
    """One integer solution x of M x = b plus a kernel basis, or None."""
    d, u, v = smith_normal_form(m)
    nr, nc = len(m), len(m[0])
    ub = [sum(u[i][k] * b[k] for k in range(nr)) for i in range(nr)]
    y = [0] * nc
    for i in range(nr):
        di = d[i][i] if i < nc else 0
        if di:
            if ub[i] % di:
                return None
            y[i] = ub[i] // di
        elif ub[i]:
            return None
    x = [sum(v[i][k] * y[k] for k in range(nc)) for i in range(nc)]
    return x, integer_kernel(m)


# ---------------------------------------------------------------------------
# Exact LLL on integer bases (Gram-Schmidt over Fractions, delta = 3/4)


def lll_reduce(basis, delta=Fraction(3, 4)):
    b = [[int(x) for x in row] for row in basis if any(row)]
    n = len(b)
    if n == 0:
        return []

    def gram_schmidt():
        star = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                denom = _dot(star[j], star[j])
                mu[i][j] = _dot([Fraction(x) for x in b[i]], star[j]) / denom
                v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
            star.append(v)
        return star, mu

    star, mu = gram_schmidt()
    k = 1
    while k < n:
        for j in reversed(range(k)):
            q = _round_half(mu[k][j])
            if q:
                # size reduction leaves the GS vectors unchanged;
                # only row k of mu moves
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for jj in range(j):
                    mu[k][jj] -= q * mu[j][jj]
                mu[k][j] -= q
        lhs = _dot(star[k], star[k])
        rhs = (delta - mu[k][k - 1] ** 2) * _dot(star[k - 1], star[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            star, mu = gram_schmidt()
            k = max(k - 1, 1)
    return b


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), start=Fraction(0))


def _round_half(q):
    # nearest integer, ties toward zero (deterministic)
    n, d = q.numerator, q.denominator
    quo, rem = divmod(abs(n), d)
    if 2 * rem > d:
        quo += 1
    return quo if n >= 0 else -quo


def gram_schmidt_norms(basis):
    """Squared Gram-Schmidt norms of an integer basis, exact Fractions."""
    n = len(basis)
    star = []
    out = []
    for i in range(n):
        v = [Fraction(x) for x in basis[i]]
        for j in range(i):
            denom = _dot(star[j], star[j])
            c = _dot([Fraction(x) for x in basis[i]], star[j]) / denom
            v = [x - c * y for x, y in zip(v, star[j])]
        star.append(v)
        out.append(_dot(v, v))
    return out
