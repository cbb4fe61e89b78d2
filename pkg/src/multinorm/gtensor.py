"""The general tensor norm on L (x) (E (x) F).

An element U is measured by the infimum of sum_k ||a_k|| ||u_k|| ||v_k||
over representations U = sum_k a_k . (u_k <> v_k) with windowed operators
a_k, u_k in L (x) E and v_k in L (x) F.  The infimum is not computable in
closed form, so this module produces certified enclosures:

* upper end -- the cost of the best representation found (canonical
  one-term-per-coordinate start, a rank-one start when U factors, and a
  norm-transfer start built from a decomposition of beta(U));
* lower end -- the best product-functional witness, which every admissible
  norm dominates.

When the left factor carries the projective (max) quantization the norm has
a closed description through beta, and the bracket collapses accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .amplify import (MAX, MIN, AmplifiedElement, amp_norm, beta_decomposition,
                      maxleft_exact, module_action, product_functional_lower,
                      split_tensor_rows)
from .diamond import diamond_amp, tensor_space
from .lpcore import LpOperator, LpVector, NormBracket
from .measure import COUNTING, pairing, unpairing
from .normed import FiniteNormedSpace


@dataclass(frozen=True)
class RepTerm:
    """One summand a . (u <> v) of a representation."""

    a: LpOperator
    u: AmplifiedElement
    v: AmplifiedElement

    def value(self) -> AmplifiedElement:
        return module_action(self.a, diamond_amp(self.u, self.v))


@dataclass(frozen=True)
class Representation:
    """A finite representation of an element of L (x) (E (x) F)."""

    E: FiniteNormedSpace
    F: FiniteNormedSpace
    p: float
    quant_e: str = MIN
    quant_f: str = MIN
    terms: tuple = ()
    label: str = ""

    def value(self) -> AmplifiedElement:
        total = AmplifiedElement.zero(tensor_space(self.E, self.F), self.p)
        for t in self.terms:
            total = total + t.value()
        return total

    def term_costs(self) -> list[float]:
        out = []
        for t in self.terms:
            out.append(t.a.norm_bracket().upper
                       * amp_norm(t.u, self.quant_e).upper
                       * amp_norm(t.v, self.quant_f).upper)
        return out

    def cost(self) -> float:
        return float(sum(self.term_costs()))

    def verify(self, U: AmplifiedElement, tol: float = 1e-9) -> bool:
        return self.value().allclose(U, tol)

    def transport(self, a: LpOperator) -> "Representation":
        """Representation of a . U obtained by composing the operator slots."""
        new = tuple(RepTerm(a.compose(t.a), t.u, t.v) for t in self.terms)
        return Representation(self.E, self.F, self.p, self.quant_e,
                              self.quant_f, new, label=f"transport({self.label})")


def _basis_vec(atom: int, p: float) -> LpVector:
    return LpVector(COUNTING, p, {atom: 1.0})


def canonical_representation(U: AmplifiedElement, E: FiniteNormedSpace,
                             F: FiniteNormedSpace, quant_e: str = MIN,
                             quant_f: str = MIN) -> Representation:
    """One term per nonzero E (x) F coordinate: a_{ij} e_0 = xi_{ij}."""
    p = U.p
    e0 = _basis_vec(0, p)
    terms = []
    for i in range(E.dim):
        for j in range(F.dim):
            xi = U.column(i * F.dim + j)
            if not xi.entries:
                continue
            a = LpOperator.rank_one(xi, pairing(0, 0), p, U.space)
            u = AmplifiedElement.elementary(e0, np.eye(E.dim)[i], E)
            v = AmplifiedElement.elementary(e0, np.eye(F.dim)[j], F)
            terms.append(RepTerm(a, u, v))
    return Representation(E, F, p, quant_e, quant_f, tuple(terms),
                          label="canonical")


def _diamond_factored_representation(U, E, F, quant_e, quant_f):
    """Single-term representation id . (u <> v) when U factors, else None.

    Unfolding U as a (base-atom x E-coordinate) by (base-atom x F-coordinate)
    matrix through the unpairing, U = u <> v holds exactly when the unfolding
    has rank one.
    """
    if not U.space.is_counting or U.is_zero:
        return None
    split = {t: unpairing(t) for t in U.rows}
    arows = sorted({a for a, _ in split.values()})
    brows = sorted({b for _, b in split.values()})
    ai = {a: i for i, a in enumerate(arows)}
    bi = {b: i for i, b in enumerate(brows)}
    W = np.zeros((len(arows) * E.dim, len(brows) * F.dim))
    for t, (a, b) in split.items():
        blk = U.rows[t].reshape(E.dim, F.dim)
        W[ai[a] * E.dim:(ai[a] + 1) * E.dim,
          bi[b] * F.dim:(bi[b] + 1) * F.dim] = blk
    try:
        uu, ss, vvt = np.linalg.svd(W)
    except np.linalg.LinAlgError:
        return None
    if ss.size == 0 or ss[0] <= 0 or (ss > 1e-12 * ss[0]).sum() != 1:
        return None
    c = np.sqrt(ss[0])
    P = (c * uu[:, 0]).reshape(len(arows), E.dim)
    Q = (c * vvt[0, :]).reshape(len(brows), F.dim)
    u = AmplifiedElement(COUNTING, U.p, E,
                         {a: P[ai[a]] for a in arows if np.any(P[ai[a]])})
    v = AmplifiedElement(COUNTING, U.p, F,
                         {b: Q[bi[b]] for b in brows if np.any(Q[bi[b]])})
    window = tuple(sorted(U.rows))
    term = RepTerm(LpOperator.identity(window, U.p), u, v)
    rep = Representation(E, F, U.p, quant_e, quant_f, (term,),
                         label="diamond-factored")
    return rep if rep.verify(U, tol=1e-9) else None


def transfer_representation(U: AmplifiedElement, E: FiniteNormedSpace,
                            F: FiniteNormedSpace, quant_e: str = MIN,
                            quant_f: str = MIN, restarts: int = 6,
                            seed: int = 0) -> Representation | None:
    """Norm-transfer start: U = T . sum_k (e_0 x_k) <> w_k.

    Any decomposition beta(U) = sum x_k (x) w_k lifts to a representation
    whose operator slot is the coisometry T e_{pairing(0, n)} = e_n, of norm
    exactly one; the cost then matches the decomposition cost.
    """
    if not U.space.is_counting:
        return None
    p = U.p
    terms_bd, _ = beta_decomposition(U, E, F, quant_f, restarts=restarts, seed=seed)
    if not terms_bd:
        return None
    support = sorted({n for _, w in terms_bd for n in w.rows})
    T = LpOperator(COUNTING, p, tuple(pairing(0, n) for n in support),
                   tuple(support), np.eye(len(support)))
    e0 = _basis_vec(0, p)
    terms = tuple(RepTerm(T, AmplifiedElement.elementary(e0, x, E), w)
                  for x, w in terms_bd)
    return Representation(E, F, p, quant_e, quant_f, terms, label="transfer")


def general_norm_upper(U: AmplifiedElement, E: FiniteNormedSpace,
                       F: FiniteNormedSpace, quant_e: str = MIN,
                       quant_f: str = MIN, restarts: int = 6,
                       seed: int = 0) -> tuple[float, Representation]:
    """Cost of the best representation found, with the representation."""
    if U.is_zero:
        empty = Representation(E, F, U.p, quant_e, quant_f, (), label="zero")
        return 0.0, empty
    candidates = [canonical_representation(U, E, F, quant_e, quant_f)]
    r1 = _diamond_factored_representation(U, E, F, quant_e, quant_f)
    if r1 is not None:
        candidates.append(r1)
    tr = transfer_representation(U, E, F, quant_e, quant_f,
                                 restarts=restarts, seed=seed)
    if tr is not None:
        candidates.append(tr)
    best, best_rep = np.inf, candidates[0]
    for rep in candidates:
        c = rep.cost()
        if c < best:
            best, best_rep = c, rep
    return float(best), best_rep


def general_norm_lower(U: AmplifiedElement, E: FiniteNormedSpace,
                       F: FiniteNormedSpace, seed: int = 0) -> float:
    """Product-functional witness value (sound for every admissible norm)."""
    if U.is_zero:
        return 0.0
    return product_functional_lower(U, E, F, seed=seed)


def general_norm_bracket(U: AmplifiedElement, E: FiniteNormedSpace,
                         F: FiniteNormedSpace, quant_e: str = MIN,
                         quant_f: str = MIN, restarts: int = 6,
                         seed: int = 0) -> NormBracket:
    """Certified enclosure of the general tensor norm of U."""
    if U.is_zero:
        return NormBracket.exact(0.0)
    upper, _ = general_norm_upper(U, E, F, quant_e, quant_f,
                                  restarts=restarts, seed=seed)
    lower = general_norm_lower(U, E, F, seed=seed)
    if quant_e == MAX:
        # closed description through beta for a projective left factor
        ml = maxleft_exact(U, E, F, quant_f=quant_f, seed=seed)
        lower = max(lower, ml.lower)
        upper = min(upper, ml.upper)
    return NormBracket(min(lower, upper), max(lower, upper))


def maxleft_norm(U: AmplifiedElement, E: FiniteNormedSpace,
                 F: FiniteNormedSpace, quant_f: str = MIN,
                 seed: int = 0) -> NormBracket:
    """General tensor norm with a max-quantized left factor (via beta)."""
    return maxleft_exact(U, E, F, quant_f=quant_f, seed=seed)
