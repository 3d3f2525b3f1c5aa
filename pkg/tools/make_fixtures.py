#!/usr/bin/env python3
"""Regenerate the bundled field fixtures.

Cyclotomic bundles ship cyclotomic-unit systems (fundamental for the
prime-power conductors used here, class number of the real subfield 1);
the octic CM census sample combines degree-8 cyclotomic fields with
octic subfields of larger cyclotomics cut out by Gaussian periods.
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import mpmath

from normform.bundles import FieldBundle, parse_and_validate_bundle
from normform.errors import NormformError
from normform.field import EmbeddingTable, NumberFieldDesc, minimal_polynomial
from normform.galois import compute_galois_table, infinite_places
from normform.units import UnitGroupData, regulator_from_logs, validate_unit_group

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "normform", "data")
PREC = 256


def cyclotomic_poly(n):
    """Coefficients of Phi_n, constant first, by iterated exact division."""
    from fractions import Fraction

    from normform.field import poly_divmod, poly_trim

    poly = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]  # x^n - 1
    poly = poly_trim(poly)
    for d in range(1, n):
        if n % d == 0:
            phi_d = cyclotomic_poly(d)
            q, r = poly_divmod(poly, tuple(Fraction(c) for c in phi_d))
            assert not r
            poly = q
    return [int(c) for c in poly]


def cyclotomic_bundle(conductor, unit_exponents, torsion):
    """Bundle for Q(zeta_conductor) with units (1 - z^a)/(1 - z)."""
    f = cyclotomic_poly(conductor)
    label = f"Q(zeta{conductor})"
    field = NumberFieldDesc(f, label)
    z = field.theta()
    one = field.one()
    units = []
    for a in unit_exponents:
        num = one - z ** a
        den = one - z
        units.append(num / den)
    table = EmbeddingTable.build(field, PREC)
    gal = compute_galois_table(field, table)
    places = infinite_places(field, table, gal)
    w, gen = torsion
    ug = UnitGroupData(field, gen(field), w, tuple(units), None, True)
    failures = validate_unit_group(ug, table, places, PREC)
    assert not failures, failures
    reg = regulator_from_logs(ug, table, places, PREC)
    bundle = FieldBundle(
        label=label, min_poly=tuple(f), torsion_order=w,
        torsion_gen=gen(field).coords,
        fund_units=tuple(u.coords for u in units),
        regulator=mpmath.nstr(reg, 40),
        units_fundamental=True)
    return bundle


def gaussian_period_octic(conductor, h):
    """Minimal polynomial of zeta_f + zeta_f^h, an octic imaginary abelian
    field when h^2 = 1 mod f, h != +-1, phi(f) = 16."""
    f = cyclotomic_poly(conductor)
    big = NumberFieldDesc(f, f"Q(zeta{conductor})")
    z = big.theta()
    eta = z + z ** h
    mp = minimal_polynomial(eta)
    if len(mp) - 1 != 8:
        return None
    return list(mp)


def main():
    os.makedirs(OUT_DIR, exist_ok=True)

    bundles = {
        "q_zeta7": cyclotomic_bundle(
            7, (2, 3), (14, lambda K: -K.theta())),
        "q_zeta9": cyclotomic_bundle(
            9, (2, 4), (18, lambda K: -K.theta())),
        "q_zeta16": cyclotomic_bundle(
            16, (3, 5, 7), (16, lambda K: K.theta())),
    }
    for name, bundle in bundles.items():
        path = os.path.join(OUT_DIR, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(bundle.canonical_json())
        # round-trip through full validation
        parse_and_validate_bundle(bundle.canonical_json(), PREC)
        print(f"wrote {path}")

    census = []
    for conductor in (15, 16, 20, 24):
        poly = cyclotomic_poly(conductor)
        census.append({"label": f"Q(zeta{conductor})", "min_poly": poly})
        print(f"census: Q(zeta{conductor})")
    period_specs = [(32, 15), (40, 9), (40, 31), (48, 25), (48, 31), (60, 41),
                    (60, 31), (44, 21)]
    for conductor, h in period_specs:
        if len(census) >= 10:
            break
        if (h * h) % conductor != 1 or h % conductor in (1, conductor - 1):
            continue
        poly = gaussian_period_octic(conductor, h)
        if poly is None:
            print(f"census: period({conductor},{h}) does not give degree 8, skipped")
            continue
        label = f"octic-period-{conductor}-{h}"
        try:
            parse_and_validate_bundle(
                json.dumps({"schema": "normform.bundle/1", "label": label,
                            "min_poly": poly}), 192)
        except NormformError as exc:
            print(f"census: {label} failed validation ({exc}), skipped")
            continue
        census.append({"label": label, "min_poly": poly})
        print(f"census: {label}")
    assert len(census) == 10, f"need 10 census fields, found {len(census)}"
    doc = {"schema": "normform.census/1", "fields": census}
    path = os.path.join(OUT_DIR, "octic_cm_sample.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
