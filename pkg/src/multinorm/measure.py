"""Atomic measure spaces and the fixed pairing bijection.

Two kinds of spaces are supported: finite weighted atom sets, and counting
measure on the naturals.  The counting space is the "convenient" base: it has
infinitely many atoms, so it is measure-isomorphic to its own square.  That
isomorphism is fixed once and for all through the Cantor pairing function;
every diamond product and every disjoint isometry in the package goes through
it, which is what makes all computed norms reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def pairing(m: int, n: int) -> int:
    """Cantor pairing (m, n) -> (m+n)(m+n+1)/2 + n, a bijection N x N -> N."""
    if m < 0 or n < 0:
        raise ValueError("pairing is defined on nonnegative integers")
    s = m + n
    return s * (s + 1) // 2 + n


def unpairing(k: int) -> tuple[int, int]:
    """Inverse of :func:`pairing`."""
    if k < 0:
        raise ValueError("unpairing is defined on nonnegative integers")
    s = (math.isqrt(8 * k + 1) - 1) // 2
    n = k - s * (s + 1) // 2
    return s - n, n


class UnsupportedCombination(ValueError):
    """Raised when an operation is asked of measure spaces it cannot mix."""


@dataclass(frozen=True)
class MeasureSpace:
    """A finite weighted atom set, or counting measure on the naturals.

    ``atoms`` maps an opaque atom id to its strictly positive weight; it is
    ``None`` exactly when the space is the counting space (every natural has
    weight 1).
    """

    atoms: tuple[tuple[object, float], ...] | None = None
    _index: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.atoms is not None:
            ids = [a for a, _ in self.atoms]
            if len(set(ids)) != len(ids):
                raise ValueError("atom ids must be unique")
            for a, w in self.atoms:
                if not w > 0:
                    raise ValueError(f"weight of atom {a!r} must be positive")
            object.__setattr__(self, "_index", dict(self.atoms))

    @property
    def is_counting(self) -> bool:
        return self.atoms is None

    def weight(self, atom) -> float:
        if self.is_counting:
            return 1.0
        try:
            return self._index[atom]
        except KeyError:
            raise KeyError(f"{atom!r} is not an atom of this space") from None

    def atom_ids(self) -> list:
        if self.is_counting:
            raise UnsupportedCombination("counting space has infinitely many atoms")
        return [a for a, _ in self.atoms]

    def __contains__(self, atom) -> bool:
        if self.is_counting:
            return isinstance(atom, int) and atom >= 0
        return atom in self._index

    def to_json(self) -> dict:
        if self.is_counting:
            return {"kind": "counting"}
        return {"kind": "finite", "atoms": [{"id": a, "w": w} for a, w in self.atoms]}

    @classmethod
    def from_json(cls, obj: dict) -> "MeasureSpace":
        kind = obj.get("kind")
        if kind == "counting":
            return COUNTING
        if kind == "finite":
            return cls(tuple((d["id"], float(d["w"])) for d in obj["atoms"]))
        raise ValueError(f"unknown measure-space kind {kind!r}")


COUNTING = MeasureSpace()


def finite_space(weights: dict) -> MeasureSpace:
    """Finite atomic space from an id -> weight mapping."""
    return MeasureSpace(tuple(weights.items()))


def product_space(x: MeasureSpace, y: MeasureSpace) -> MeasureSpace:
    """Product of two atomic spaces; weights multiply.

    Counting x counting is relabelled back onto the naturals through the
    pairing bijection, so the product is again the counting space.
    """
    if x.is_counting and y.is_counting:
        return COUNTING
    if x.is_counting or y.is_counting:
        raise UnsupportedCombination("cannot mix finite and counting spaces")
    atoms = tuple(((a, b), wa * wb) for a, wa in x.atoms for b, wb in y.atoms)
    return MeasureSpace(atoms)
