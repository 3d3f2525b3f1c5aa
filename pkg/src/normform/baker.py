"""Executable lower bounds for linear forms in logarithms, the derived
height bound for three-term unit equations with slowly growing
coefficients, and LLL-based reduction of the resulting bounds.

The constant chain is materialized step by step; docs/bound-derivation.md
in the repository walks through every inequality with the same names as
the code.  All constants are rounded in the safe direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
from mpmath import mpf, workprec

from . import linalg
from .errors import InvalidInput, PrecisionExhausted
from .field import absolute_height, embed


@dataclass
class MatveevInput:
    m: int                  # number of logarithms
    n_deg: int              # degree of the ambient field
    kappa: int              # 1 for real ambient field, 2 otherwise
    B: float                # max |b_i|
    A_list: tuple           # A_j >= max(n h(a_j), |log a_j|, 0.16)

    def validate(self):
        if self.kappa not in (1, 2):
            raise InvalidInput("kappa must be 1 or 2")
        if self.B < 1:
            raise InvalidInput("B must be at least 1")
        if len(self.A_list) != self.m or self.m < 1:
            raise InvalidInput("A_list length must equal m")
        if any(mpf(a) < mpf("0.16") for a in self.A_list):
            raise InvalidInput("every A_j must be at least 0.16")


def matveev_prefactor(m, n_deg, kappa, A_list, prec=128):
    """(1/kappa) (e m)^kappa 30^(m+3) m^3.5 n^2 log(e n) prod A_j."""
    with workprec(prec):
        e = mpmath.e
        out = (1 / mpf(kappa)) * (e * m) ** kappa * mpf(30) ** (m + 3)
        out *= mpf(m) ** mpf("3.5") * mpf(n_deg) ** 2 * mpmath.log(e * n_deg)
        for a in A_list:
            out *= mpf(a)
        return out


def matveev_bound(inp, prec=128):
    """Lower bound for log|Lambda|, exactly the published right-hand side."""
    inp.validate()
    with workprec(prec):
        pref = matveev_prefactor(inp.m, inp.n_deg, inp.kappa, inp.A_list, prec)
        return -pref * mpmath.log(mpmath.e * mpf(inp.B))


def select_kappa(ambient_is_real):
    return 1 if ambient_is_real else 2


@dataclass
class BoundCertificate:
    matveev_constant: object          # full prefactor at the final bound
    c_growth: object
    d_growth: object
    initial_height_bound: object      # H0
    reduced_bound: object             # H1 <= H0
    status: str = "Conditional"       # "Proven" or "Conditional"
    searched_up_to: object = None     # height actually enumerated
    chain: list = dc_field(default_factory=list)

    def to_dict(self):
        def fmt(x):
            return None if x is None else mpmath.nstr(mpf(x), 17)

        return {
            "matveev_constant": fmt(self.matveev_constant),
            "c_growth": fmt(self.c_growth),
            "d_growth": fmt(self.d_growth),
            "initial_height_bound": fmt(self.initial_height_bound),
            "reduced_bound": fmt(self.reduced_bound),
            "status": self.status,
            "searched_up_to": fmt(self.searched_up_to),
            "chain": [dict(entry, bound=fmt(entry["bound"])) for entry in self.chain],
        }


def solve_implicit_bound(F, prec=128, tol=mpf("1e-6")):
    """Largest fixed point of x = F(x) for increasing F growing slower than
    x; monotone iteration from above, returned with 10% slack."""
    with workprec(prec):
        x = mpf(10) ** 40
        while F(x) >= x:
            x = x * x
            if x > mpf(10) ** 100000:
                raise PrecisionExhausted("implicit bound does not close")
        for _ in range(10000):
            nxt = F(x)
            if nxt < 3:
                nxt = mpf(3)
            if abs(nxt - x) <= tol * x:
                x = nxt
                break
            x = nxt
        out = x * mpf("1.1")
        if not F(out) <= out:
            raise PrecisionExhausted("fixed point lost after slack")
        return out


class UnitContext:
    """Numeric data shared by the bound machinery: unit heights, log
    embeddings, and the exponent-from-log solve matrix."""

    def __init__(self, ug, table, places, prec):
        self.ug = ug
        self.table = table
        self.places = places
        self.prec = prec
        n = ug.field.degree
        self.n = n
        self.s = places.s
        self.r = ug.rank
        self._tables = {table.precision: table}
        with workprec(prec + 32):
            self.unit_heights = []
            for eps in ug.fund_units:
                h, err = absolute_height(eps, prec)
                self.unit_heights.append(h + err)
            self.unit_logs = []      # unit_logs[i][j]: Log sigma_j(eps_i)
            for eps in ug.fund_units:
                balls = embed(eps, table)
                self.unit_logs.append([mpmath.log(b.mid) for b in balls])
            self.zeta_logs = [mpmath.log(b.mid)
                              for b in embed(ug.zeta, table)]
            rows, _err = ug.log_matrix(table, places, prec)
            r = self.r
            if r:
                m = mpmath.matrix([[rows[i][j] for i in range(r)]
                                   for j in range(r)])
                inv = m ** -1
                self.c_g = max(sum(abs(inv[i, j]) for j in range(r))
                               for i in range(r)) * (1 + mpf(2) ** -40)
            else:
                self.c_g = mpf(0)

    def table_at(self, prec):
        best = max(p for p in self._tables if p >= prec) if \
            any(p >= prec for p in self._tables) else None
        if best is not None:
            return self._tables[best]
        target = max(prec, 2 * max(self._tables))
        base = self._tables[max(self._tables)]
        refined = base.refined(target)
        self._tables[target] = refined
        return refined

    def unit_log_at(self, i, root_idx, prec):
        table = self.table_at(prec)
        with workprec(prec + 32):
            b = embed(self.ug.fund_units[i], table)[root_idx]
            return mpmath.log(b.mid)

    def element_log_at(self, x, root_idx, prec):
        table = self.table_at(prec)
        with workprec(prec + 32):
            b = embed(x, table)[root_idx]
            return mpmath.log(b.mid)

    def exponent_box_from_height(self, H):
        """|a_i| bound for a single unit u with n h(u) <= H."""
        return int(mpmath.ceil(self.c_g * mpf(H))) if self.r else 0

    def a_values(self, place=None):
        """Matveev A_j values for the fundamental units (max over places)."""
        out = []
        for i, eps in enumerate(self.ug.fund_units):
            logs = self.unit_logs[i]
            biggest = max(abs(l) for l in logs)
            out.append(max(self.n * self.unit_heights[i], biggest, mpf("0.16")))
        return out

    def a_torsion(self):
        return max(2 * mpmath.pi / self.ug.w, mpf("0.16"))


def three_term_height_bound(coeff_heights, growth, unit_ctx, prec=None):
    """H0 with h(u-tuple) <= H0 for every solution of a three-term unit
    equation whose coefficient heights satisfy h <= c + d log h(tuple).

    Pipeline (all constants explicit, safe-rounded):
      * dehomogenize; unit norms make the projective and dehomogenized
        tuple heights equal;
      * place selection: some place has max ||U||, ||V||, 1 >= H^(1/s);
      * split on |T - 1| >= 0.1 (T = -aU/bV): the far case gives a
        closed-form bound, the near case feeds the linear form in r + 2
        logarithms to the Matveev bound;
      * the resulting implicit inequality x <= F(log x) is solved by
        monotone iteration.
    """
    prec = prec or unit_ctx.prec
    ctx = unit_ctx
    n, s, r = ctx.n, ctx.s, ctx.r
    c_growth, d_growth = mpf(growth[0]), mpf(growth[1])
    h_static = max(mpf(h) for h in coeff_heights)
    with workprec(prec + 32):
        def hmax(logx):
            # effective coefficient-height budget at tuple height exp(logx)
            return max(h_static, c_growth + d_growth * logx)

        # Case A: |T-1| >= 0.1  ->  h <= 2s log 11 + 4ns hmax(log h)
        caseA = solve_implicit_bound(
            lambda x: 2 * s * mpmath.log(11) + 4 * n * s * hmax(mpmath.log(x)),
            prec)

        # Case B constants
        m_t = r + 2
        a_fixed = ctx.a_values() + [ctx.a_torsion()]
        k_base = matveev_prefactor(m_t, n, 2, a_fixed, prec)

        def a_coeff(logx):
            h2 = 2 * hmax(logx) + mpmath.log(2)
            return n * h2 + mpmath.pi + mpf("0.16")

        c_b1 = ctx.ug.w * (1 + r * ctx.c_g)  # B <= c_b0 + c_b1 * h
        c_b0 = ctx.ug.w + 2

        def caseB_rhs(x):
            lx = mpmath.log(x)
            k_m = k_base * a_coeff(lx)
            log_eb = mpmath.log(mpmath.e * (c_b0 + c_b1 * x))
            return (2 * s * mpmath.log(mpf("2.2"))
                    + 4 * s * n * hmax(lx)
                    + 2 * s * k_m * log_eb)

        caseB = solve_implicit_bound(caseB_rhs, prec)
        h0 = max(caseA, caseB, mpf(3))
        cert = BoundCertificate(
            matveev_constant=k_base * a_coeff(mpmath.log(h0)),
            c_growth=c_growth, d_growth=d_growth,
            initial_height_bound=h0, reduced_bound=h0)
        cert.chain.append({"stage": "matveev-fixed-point", "bound": h0})
        return cert


@dataclass
class LinearFormBranch:
    """|b_0 (2 pi i / w) + sum a_i theta_i + theta_t| <= exp(logK1 - K2 h)
    for solutions attached to this branch, with |a_i| <= X_a, |b_0| <= X_b.
    theta_i = Log sigma_root(eps_i); theta_t = Log(-sigma_root(num/den)),
    recomputed at whatever precision the lattice scale demands."""
    num: object           # NFElement
    den: object           # NFElement
    root_idx: int
    log_k1: object
    k2: object
    label: str = ""


def branches_for_three_term(alpha, beta, gamma, heights, unit_ctx, prec=None):
    """Reduction branches for a fixed-coefficient three-term equation:
    one per (place, dehomogenized ordering)."""
    prec = prec or unit_ctx.prec
    ctx = unit_ctx
    h_a, h_b, h_c = (mpf(h) for h in heights)
    out = []
    with workprec(prec + 32):
        for p_idx, (root_idx, _conj) in enumerate(ctx.places.pairs):
            for (num, den, hf, tag) in ((alpha, beta, h_a, "ab"),
                                        (beta, alpha, h_b, "ba")):
                log_k1 = (mpmath.log(mpf("2.2")) + ctx.n * (h_c + hf))
                out.append(LinearFormBranch(
                    num=num, den=den, root_idx=root_idx,
                    log_k1=log_k1, k2=mpf(1) / (2 * ctx.s),
                    label=f"place{p_idx}/order{tag}"))
    return out


def reduce_bound_lattice(cert, branches, unit_ctx, prec=None,
                         max_rounds=12, improvement=mpf("0.9")):
    """Iterated LLL reduction of the height bound; never increases it.

    Each branch is a linear form with fixed coefficient logs; a short
    lattice via the Kannan embedding contradicts solutions with bound
    below the current one, yielding a smaller bound.  Rounds stop when
    the improvement falls under 10%.
    """
    prec = prec or unit_ctx.prec
    ctx = unit_ctx
    h_cur = mpf(cert.reduced_bound)
    floor = mpf(3)
    for round_no in range(max_rounds):
        per_branch = []
        ok = True
        for br in branches:
            nb = _reduce_one_branch(br, h_cur, ctx, prec)
            if nb is None:
                ok = False
                break
            per_branch.append(nb)
        if not ok:
            break
        h_new = max(max(per_branch), floor)
        if h_new >= h_cur * improvement:
            if h_new < h_cur:
                h_cur = h_new
                cert.chain.append({"stage": f"lattice-round-{round_no}",
                                   "bound": h_cur})
            break
        h_cur = h_new
        cert.chain.append({"stage": f"lattice-round-{round_no}", "bound": h_cur})
    if h_cur < mpf(cert.reduced_bound):
        cert.reduced_bound = h_cur
    return cert


def _reduce_one_branch(br, h_cur, ctx, prec):
    from .errors import NotAUnit, NotInSpan
    from .units import unit_discrete_log

    with workprec(max(prec, 64) + 32):
        x_a = max(1, ctx.exponent_box_from_height(2 * h_cur))
        x_b = int(mpmath.ceil(ctx.ug.w * (2 + 2 * ctx.r * ctx.c_g * h_cur) / 2)) + 1
    r = ctx.r
    w = ctx.ug.w

    # When the target log is itself in the unit-log lattice the
    # inhomogeneous distance is zero; shift variables and reduce the
    # homogeneous form instead.  Detected exactly via discrete log.
    ratio = -(br.num / br.den)
    shift = None
    try:
        shift = unit_discrete_log(ratio, ctx.ug, ctx.table, ctx.places, ctx.prec)
    except (NotAUnit, NotInSpan):
        shift = None

    bounds = [x_a] * r + [x_b]
    if shift is not None:
        bounds = [x_a + abs(si) for si in shift.a] + [x_b + w]
    x_max = max(bounds)
    weights = [max(1, x_max // b) for b in bounds]
    weighted = [bounds[i] * weights[i] for i in range(len(bounds))]

    for attempt in range(5):
        scale_bits = ((r + 3) * (x_max.bit_length() + 4) + 40 + 10 * attempt)
        c_scale = 1 << scale_bits
        need = scale_bits + x_max.bit_length() + 64
        with workprec(need):
            theta_list = [ctx.unit_log_at(i, br.root_idx, need)
                          for i in range(r)]
            torsion_theta = 2 * mpmath.pi / w
            rows = []
            ncols_vars = r + 1
            for i in range(r):
                rows.append([weights[i] if k == i else 0
                             for k in range(ncols_vars)]
                            + [_scaled_int(theta_list[i].real, c_scale),
                               _scaled_int(theta_list[i].imag, c_scale)])
            rows.append([weights[r] if k == r else 0 for k in range(ncols_vars)]
                        + [0, _scaled_int(torsion_theta, c_scale)])
            m_w = 0
            if shift is None:
                target = ctx.element_log_at(ratio, br.root_idx, need)
                m_w = x_max
                for row in rows:
                    row.insert(ncols_vars, 0)
                rows.append([0] * ncols_vars + [m_w]
                            + [_scaled_int(target.real, c_scale),
                               _scaled_int(target.imag, c_scale)])
        reduced = linalg.lll_reduce(rows)
        norms = linalg.gram_schmidt_norms(reduced)
        lam_min_sq = min(norms)
        with workprec(max(prec, 64) + 32):
            lam = mpf(lam_min_sq.numerator) / mpf(lam_min_sq.denominator)
            base = sum(mpf(v) ** 2 for v in weighted) + mpf(m_w) ** 2
            gap = lam - base
            if gap <= 0:
                continue
            w_room = mpmath.sqrt(gap / 2)
            delta = (sum(bounds) + 1) * mpf("0.5") + 1
            if w_room <= delta * 2:
                continue
            # c_scale * K1 * exp(-K2 h_new) <= w_room - delta
            log_rhs = mpmath.log(w_room - delta)
            h_new = (mpmath.log(c_scale) + br.log_k1 - log_rhs) / br.k2
            if h_new < 1:
                h_new = mpf(1)
            if h_new >= h_cur:
                return h_cur
            return h_new
    return None


def _scaled_int(x, c_scale):
    return int(mpmath.nint(mpf(x) * c_scale))
