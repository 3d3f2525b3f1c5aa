"""Unit-equation containers shared by the solvers and the oracle."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import InvalidInput


@dataclass(frozen=True)
class Slot:
    """One position of a unit equation: which unknown sits there and which
    automorphism is applied to it.  Conjugate-linked systems use a single
    unknown with varying sigma; standalone equations use several unknowns
    with sigma = 0 (the identity)."""
    var: int
    sigma: int = 0


@dataclass
class UnitEquation:
    coeffs: tuple          # NFElements, zeros allowed
    slots: tuple           # Slot per position
    provenance: tuple = ()

    def __post_init__(self):
        if len(self.coeffs) != len(self.slots):
            raise InvalidInput("coeffs and slots must align")
        if len(self.nonzero()) < 2:
            raise InvalidInput("a unit equation needs at least two nonzero terms")

    def nonzero(self):
        return [(i, c) for i, c in enumerate(self.coeffs) if c]

    def unknowns(self):
        return sorted({s.var for i, s in enumerate(self.slots) if self.coeffs[i]})
