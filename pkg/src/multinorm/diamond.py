"""The metric diamond operation on the counting base space.

The pairing bijection of atoms induces an isometric identification of
Lp(N x N) with Lp(N); composing it with the pointwise product of functions
of two variables gives a bilinear map on the base space with the metric
property ||xi <> eta|| = ||xi|| ||eta||.  It extends to amplified elements
columnwise and to pairs of amplified elements through the coordinate basis
of E (x) F.
"""

from __future__ import annotations

import numpy as np

from .amplify import AmplifiedElement
from .lpcore import LpOperator, LpVector
from .measure import COUNTING, UnsupportedCombination, pairing
from .normed import FiniteNormedSpace, lq_space


def diamond_base_index(m: int, n: int) -> int:
    """Atom carrying the (m, n) product component."""
    return pairing(m, n)


def diamond_base(xi: LpVector, eta: LpVector) -> LpVector:
    """(xi <> eta)_{pairing(m, n)} = xi_m eta_n."""
    if not (xi.space.is_counting and eta.space.is_counting):
        raise UnsupportedCombination("diamond needs the counting base space")
    if xi.p != eta.p:
        raise ValueError("exponent mismatch")
    ent = {}
    for m, a in xi.entries.items():
        for n, b in eta.entries.items():
            ent[pairing(m, n)] = a * b
    return LpVector(COUNTING, xi.p, ent)


def diamond_operator(xi: LpVector, window) -> LpOperator:
    """T_xi : eta -> xi <> eta restricted to a finite domain window.

    T_xi is ||xi|| times an isometry, so its norm bracket collapses to
    ||xi||.
    """
    window = tuple(window)
    sup = sorted(xi.entries)
    cod = tuple(pairing(m, n) for m in sup for n in window)
    mat = np.zeros((len(cod), len(window)))
    k = 0
    for m in sup:
        for j, _ in enumerate(window):
            mat[k, j] = xi.entries[m]
            k += 1
    return LpOperator(COUNTING, xi.p, window, cod, mat)


def diamond_left(xi: LpVector, u: AmplifiedElement) -> AmplifiedElement:
    """xi <> u, applying T_xi to every coordinate column."""
    if not (xi.space.is_counting and u.space.is_counting):
        raise UnsupportedCombination("diamond needs the counting base space")
    if xi.p != u.p:
        raise ValueError("exponent mismatch")
    rows = {}
    for m, a in xi.entries.items():
        for n, r in u.rows.items():
            t = pairing(m, n)
            rows[t] = rows.get(t, np.zeros(u.E.dim)) + a * r
    return AmplifiedElement(COUNTING, u.p, u.E, rows)


def diamond_right(u: AmplifiedElement, eta: LpVector) -> AmplifiedElement:
    if not (eta.space.is_counting and u.space.is_counting):
        raise UnsupportedCombination("diamond needs the counting base space")
    if eta.p != u.p:
        raise ValueError("exponent mismatch")
    rows = {}
    for m, r in u.rows.items():
        for n, b in eta.entries.items():
            t = pairing(m, n)
            rows[t] = rows.get(t, np.zeros(u.E.dim)) + b * r
    return AmplifiedElement(COUNTING, u.p, u.E, rows)


def tensor_space(E: FiniteNormedSpace, F: FiniteNormedSpace) -> FiniteNormedSpace:
    """Coordinate carrier for E (x) F (norm oracles come from the tensor
    norms, so the placeholder norm is the Euclidean one)."""
    return lq_space(E.dim * F.dim, 2)


def diamond_amp(u: AmplifiedElement, v: AmplifiedElement) -> AmplifiedElement:
    """u <> v in L (x) (E (x) F), rows indexed through the pairing."""
    if not (u.space.is_counting and v.space.is_counting):
        raise UnsupportedCombination("diamond needs the counting base space")
    if u.p != v.p:
        raise ValueError("exponent mismatch")
    E, F = u.E, v.E
    rows = {}
    for m, ru in u.rows.items():
        for n, rv in v.rows.items():
            t = pairing(m, n)
            block = np.outer(ru, rv).reshape(E.dim * F.dim)
            if t in rows:
                rows[t] = rows[t] + block
            else:
                rows[t] = block
    return AmplifiedElement(COUNTING, u.p, tensor_space(E, F), rows)
