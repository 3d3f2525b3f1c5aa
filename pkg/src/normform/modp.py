"""Univariate polynomial arithmetic modulo a prime.

Polynomials are tuples of ints, constant term first, reduced mod p.
Used for the irreducibility screen in field validation and for the
split-prime norm filter in the oracle.
"""

from __future__ import annotations

import random


def trim(poly):
    n = len(poly)
    while n > 0 and poly[n - 1] == 0:
        n -= 1
    return tuple(poly[:n])


def reduce_mod(poly, p):
    return trim([c % p for c in poly])


def degree(poly):
    return len(poly) - 1


def mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = (out[i + j] + ai * bj) % p
    return trim(out)


def divmod_poly(a, b, p):
    """(q, r) with a = q*b + r, deg r < deg b.  b must be nonzero."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    binv = pow(b[-1], p - 2, p)
    db = len(b) - 1
    q = [0] * max(0, len(a) - db)
    while len(a) - 1 >= db and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        shift = len(a) - 1 - db
        c = (a[-1] * binv) % p
        q[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a.pop()
    return trim(q), trim(a)


def mod(a, b, p):
    return divmod_poly(a, b, p)[1]


def gcd(a, b, p):
    a, b = trim(a), trim(b)
    while b:
        a, b = b, mod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = tuple((c * inv) % p for c in a)
    return a


def pow_mod(base, e, f, p):
    """base(x)^e mod (f, p) by square and multiply."""
    result = (1,)
    base = mod(base, f, p)
    while e > 0:
        if e & 1:
            result = mod(mul(result, base, p), f, p)
        base = mod(mul(base, base, p), f, p)
        e >>= 1
    return result


def derivative(poly, p):
    return trim([(i * c) % p for i, c in enumerate(poly)][1:])


def is_squarefree(poly, p):
    poly = reduce_mod(poly, p)
    if degree(poly) < len(poly) - 1:  # leading coefficient vanished mod p
        return False
    d = derivative(poly, p)
    if not d:
        return False
    return degree(gcd(poly, d, p)) == 0


def distinct_degree_pattern(f, p):
    """Degrees of irreducible factors of squarefree f mod p, with multiplicity.

    Returns a sorted list like [2, 2, 2] for a product of three quadratics.
    """
    f = reduce_mod(f, p)
    inv = pow(f[-1], p - 2, p)
    f = tuple((c * inv) % p for c in f)
    pattern = []
    h = (0, 1)  # x
    d = 0
    rest = f
    while degree(rest) > 0:
        d += 1
        if 2 * d > degree(rest):
            pattern.extend([degree(rest)])
            break
        h = pow_mod(h, p, rest, p)
        g = gcd([(a - b) % p for a, b in _pad(h, (0, 1))], rest, p)
        if degree(g) > 0:
            pattern.extend([d] * (degree(g) // d))
            rest, _r = divmod_poly(rest, g, p)[0], None
        # h is tracked modulo the shrinking `rest`
        h = mod(h, rest, p) if degree(rest) > 0 else h
    return sorted(pattern)


def _pad(a, b):
    n = max(len(a), len(b))
    a = tuple(a) + (0,) * (n - len(a))
    b = tuple(b) + (0,) * (n - len(b))
    return list(zip(a, b))


def splits_completely(f, p):
    """True iff squarefree f mod p factors into distinct linear factors."""
    f = reduce_mod(f, p)
    if degree(f) < 1 or not is_squarefree(f, p):
        return False
    xp = pow_mod((0, 1), p, f, p)
    diff = trim([(a - b) % p for a, b in _pad(xp, (0, 1))])
    return not diff


def roots_split(f, p, seed=0):
    """All roots of f mod p, given that f splits into distinct linears."""
    f = reduce_mod(f, p)
    inv = pow(f[-1], p - 2, p)
    f = tuple((c * inv) % p for c in f)
    rng = random.Random(seed ^ p)
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        d = degree(g)
        if d == 0:
            continue
        if d == 1:
            out.append((-g[0] * pow(g[1], p - 2, p)) % p)
            continue
        while True:
            delta = rng.randrange(p)
            shifted = mod((delta, 1), g, p)
            h = pow_mod(shifted, (p - 1) // 2, g, p)
            h1 = trim([(c - (1 if i == 0 else 0)) % p for i, c in enumerate(_grow(h, 1))])
            d1 = gcd(h1, g, p)
            if 0 < degree(d1) < d:
                stack.append(d1)
                stack.append(divmod_poly(g, d1, p)[0])
                break
    return sorted(out)


def _grow(a, min_len):
    a = tuple(a)
    if len(a) < min_len:
        a = a + (0,) * (min_len - len(a))
    return a


def good_split_primes(f, count, start=3, limit=2_000_000):
    """Primes p where f mod p is squarefree and splits completely."""
    found = []
    p = start
    while len(found) < count and p < limit:
        p = _next_prime(p)
        if f[-1] % p == 0:
            continue
        if splits_completely(f, p):
            found.append(p)
    if len(found) < count:
        raise RuntimeError("not enough split primes below limit")
    return found


def _next_prime(n):
    n += 1
    while not _is_prime(n):
        n += 1
    return n


def _is_prime(n):
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True
