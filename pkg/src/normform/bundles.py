"""Field-bundle ingestion and validation, problem parsing, and canonical
JSON serialization.

Bundles carry the defining polynomial and the trusted unit-group data
(torsion generator, fundamental units, regulator).  Rationals travel as
"p/q" strings; the canonical form is sorted-keys JSON with no whitespace
variance, so emit(parse(x)) is byte-identical for canonical inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .errors import ParseError, ValidationError
from .field import EmbeddingTable, NumberFieldDesc, default_precision
from .galois import compute_galois_table, infinite_places
from .solvers import PipelineContext
from .units import UnitGroupData, validate_unit_group

SCHEMA = "normform.bundle/1"


def _parse_rational(s, path):
    try:
        if isinstance(s, int):
            return Fraction(s)
        if isinstance(s, str):
            return Fraction(s)
    except (ValueError, ZeroDivisionError):
        pass
    raise ParseError(f"{path}: expected a rational like '3' or '-2/5', got {s!r}")


def _rat_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


@dataclass
class FieldBundle:
    label: str
    min_poly: tuple
    torsion_order: int = None
    torsion_gen: tuple = None          # Fractions
    fund_units: tuple = None           # tuples of Fractions
    regulator: str = None
    units_fundamental: bool = False
    normal_closure: object = None

    @property
    def has_units(self):
        return self.torsion_order is not None

    def to_dict(self):
        out = {"schema": SCHEMA, "label": self.label,
               "min_poly": list(self.min_poly)}
        if self.has_units:
            out["unit_group"] = {
                "torsion_order": self.torsion_order,
                "torsion_gen": [_rat_str(c) for c in self.torsion_gen],
                "fund_units": [[_rat_str(c) for c in u] for u in self.fund_units],
                "regulator": self.regulator,
                "units_fundamental": self.units_fundamental,
            }
        if self.normal_closure is not None:
            out["normal_closure"] = self.normal_closure.to_dict()
        return out

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")) + "\n"


def parse_bundle(doc):
    """Parse a JSON document (text or dict) into a FieldBundle; ParseError
    names the offending path."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("bundle root must be an object")
    if "min_poly" not in doc:
        raise ParseError("min_poly: missing")
    min_poly = doc["min_poly"]
    if (not isinstance(min_poly, list) or len(min_poly) < 3
            or not all(isinstance(c, int) for c in min_poly)):
        raise ParseError("min_poly: expected a list of integers, constant first")
    label = doc.get("label", "")
    bundle = FieldBundle(label=label, min_poly=tuple(min_poly))
    ug = doc.get("unit_group")
    if ug is not None:
        n = len(min_poly) - 1
        for key in ("torsion_order", "torsion_gen", "fund_units"):
            if key not in ug:
                raise ParseError(f"unit_group.{key}: missing")
        w = ug["torsion_order"]
        if not isinstance(w, int) or w < 2:
            raise ParseError("unit_group.torsion_order: must be an integer >= 2")
        gen = ug["torsion_gen"]
        if not isinstance(gen, list) or len(gen) != n:
            raise ParseError(
                f"unit_group.torsion_gen: expected {n} coordinates, got "
                f"{len(gen) if isinstance(gen, list) else type(gen).__name__}")
        torsion_gen = tuple(_parse_rational(c, f"unit_group.torsion_gen[{i}]")
                            for i, c in enumerate(gen))
        fund = []
        for ui, u in enumerate(ug["fund_units"]):
            if not isinstance(u, list) or len(u) != n:
                raise ParseError(
                    f"unit_group.fund_units[{ui}]: expected {n} coordinates")
            fund.append(tuple(_parse_rational(c, f"unit_group.fund_units[{ui}][{i}]")
                              for i, c in enumerate(u)))
        bundle.torsion_order = w
        bundle.torsion_gen = torsion_gen
        bundle.fund_units = tuple(fund)
        bundle.regulator = ug.get("regulator")
        bundle.units_fundamental = bool(ug.get("units_fundamental", False))
    closure = doc.get("normal_closure")
    if closure is not None:
        bundle.normal_closure = parse_bundle(closure)
    return bundle


@dataclass
class LoadedBundle:
    bundle: FieldBundle
    field: object
    table: object
    gal: object
    places: object
    ug: object            # None for census-only bundles

    def context(self, prec, workers=1, exponent_radius=None, oracle_cap=None):
        if self.ug is None:
            raise ValidationError(
                f"{self.bundle.label}: bundle carries no unit-group data")
        kwargs = {}
        if oracle_cap:
            kwargs["oracle_cap"] = oracle_cap
        return PipelineContext(self.field, self.table, self.gal, self.places,
                               self.ug, prec, workers=workers,
                               exponent_radius=exponent_radius, **kwargs)


def parse_and_validate_bundle(doc, precision=None, require_units=False):
    """Full validation chain: field checks, Galois table, place pairing,
    unit-group invariants with regulator recomputation."""
    precision = precision or default_precision()
    bundle = parse_bundle(doc)
    field = NumberFieldDesc(bundle.min_poly, bundle.label)
    field.validate()
    if field.degree % 2:
        raise ValidationError(f"{bundle.label}: odd degree cannot be totally complex")
    table = EmbeddingTable.build(field, precision)
    gal = compute_galois_table(field, table)
    places = infinite_places(field, table, gal)
    ug = None
    if bundle.has_units:
        expected_rank = field.degree // 2 - 1
        if len(bundle.fund_units) != expected_rank:
            raise ValidationError(
                f"{bundle.label}: expected {expected_rank} fundamental units, "
                f"got {len(bundle.fund_units)}")
        ug = UnitGroupData(
            field, field.element(bundle.torsion_gen), bundle.torsion_order,
            tuple(field.element(u) for u in bundle.fund_units),
            bundle.regulator, bundle.units_fundamental)
        failures = validate_unit_group(ug, table, places, precision)
        if failures:
            raise ValidationError(
                f"{bundle.label}: unit group validation failed", failures)
    elif require_units:
        raise ValidationError(f"{bundle.label}: unit-group data required")
    return LoadedBundle(bundle, field, table, gal, places, ug)


def load_bundle_file(path, precision=None, require_units=False):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_and_validate_bundle(fh.read(), precision, require_units)


def bundled_fixture(name):
    """Text of a fixture shipped with the package (data/<name>.json)."""
    return resources.files("normform.data").joinpath(f"{name}.json").read_text()


# ---------------------------------------------------------------------------
# Problem parsing


def parse_alphas(spec, field):
    """Alpha list from the CLI shorthand: comma-separated tokens, each a
    power-basis shorthand ('1', 'z', 'z3', '-2', '5/3') or a raw
    colon-separated coordinate vector ('1:0:-1/2:0:0:0')."""
    out = []
    theta = field.theta()
    for tok_i, tok in enumerate(spec.split(",")):
        tok = tok.strip()
        if not tok:
            raise ParseError(f"alphas[{tok_i}]: empty token")
        if ":" in tok:
            coords = [_parse_rational(c.strip(), f"alphas[{tok_i}]")
                      for c in tok.split(":")]
            if len(coords) != field.degree:
                raise ParseError(
                    f"alphas[{tok_i}]: expected {field.degree} coordinates")
            out.append(field.element(coords))
        elif tok.startswith("z"):
            power = int(tok[1:]) if len(tok) > 1 else 1
            if power < 0:
                raise ParseError(f"alphas[{tok_i}]: negative power")
            out.append(theta ** power)
        else:
            out.append(field.from_rational(_parse_rational(tok, f"alphas[{tok_i}]")))
    return tuple(out)
