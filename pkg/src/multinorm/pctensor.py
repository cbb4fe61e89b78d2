"""The p-convex tensor norm on L (x) (E (x) F) and its exact lq oracle.

The p-convex norm measures U by the infimum of ||a|| (sum_k (||u_k|| ||v_k||)^p)^{1/p}
over representations U = a . sum_k I_k . (u_k <> v_k) with pairwise disjoint
proper isometries I_k (max convention at p = inf).  This module provides:

* PRepresentation -- the data structure, with value and certified cost;
* conversion of general representations into p-convex form with Hoelder
  balancing of the operator against the term weights;
* merging of representations (triangle inequality and p-convexity of
  orthogonally supported sums, realized constructively);
* the exact oracle for min-quantized lq factors with q conjugate to p: the
  coordinatewise product map sends U into L (x) Lq(Y x Z) isometrically, so
  its injective-quantization norm certifies the p-convex norm, and a matching
  one-term representation achieves the same cost;
* the p-convexity property check and the l1/max counterexample;
* the Kronecker-product norm inequality check.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .amplify import (MAX, MIN, AmplifiedElement, amp_norm, max_norm, min_norm,
                      module_action, product_functional_lower)
from .diamond import diamond_amp, tensor_space
from .gtensor import (Representation, RepTerm, canonical_representation,
                      general_norm_upper)
from .lpcore import (INF, LpOperator, LpVector, NormBracket, ProperIsometry,
                     conjugate, proper_projection, vector_pnorm)
from .measure import COUNTING, UnsupportedCombination, pairing
from .normed import FiniteNormedSpace, lq_space


@dataclass(frozen=True)
class PRepresentation:
    """U = a . sum_k I_k . (u_k <> v_k) with pairwise disjoint isometries.

    ``a_upper_hint`` is an optional analytic bound on ||a|| (from the
    disjointness argument) used when it beats the matrix bracket.
    """

    E: FiniteNormedSpace
    F: FiniteNormedSpace
    p: float
    a: LpOperator
    terms: tuple = ()  # (ProperIsometry, u, v)
    quant_e: str = MIN
    quant_f: str = MIN
    a_upper_hint: float = INF
    label: str = ""

    def a_upper(self) -> float:
        if self.a.matrix.size == 0 or not np.any(self.a.matrix):
            return 0.0
        return float(min(self.a.norm_bracket().upper, self.a_upper_hint))

    def term_weights(self) -> list[float]:
        return [amp_norm(u, self.quant_e).upper * amp_norm(v, self.quant_f).upper
                for _, u, v in self.terms]

    def cost(self) -> float:
        lam = self.term_weights()
        if not lam:
            return 0.0
        return self.a_upper() * vector_pnorm(np.array(lam), self.p)

    def inner_sum(self) -> AmplifiedElement:
        """sum_k I_k . (u_k <> v_k), checking isometry disjointness."""
        total = AmplifiedElement.zero(tensor_space(self.E, self.F), self.p)
        seen = set()
        for iso, u, v in self.terms:
            w = diamond_amp(u, v)
            moved = {iso.forward(t): r for t, r in w.rows.items()}
            if seen & set(moved):
                raise ValueError("proper isometries are not disjoint on the "
                                 "support of the terms")
            seen |= set(moved)
            total = total + AmplifiedElement(w.space, w.p, w.E, moved)
        return total

    def value(self) -> AmplifiedElement:
        return module_action(self.a, self.inner_sum())

    def verify(self, U: AmplifiedElement, tol: float = 1e-9) -> bool:
        return self.value().allclose(U, tol)

    def transport(self, b: LpOperator) -> "PRepresentation":
        """Representation of b . U; the hint scales by the bracket of b."""
        hint = self.a_upper_hint
        if hint < INF:
            hint = hint * b.norm_bracket().upper
        return replace(self, a=b.compose(self.a), a_upper_hint=hint,
                       label=f"transport({self.label})")


def _shift_through_star(a: LpOperator, k: int) -> LpOperator:
    """The composite a I_k^star as a windowed operator (same matrix, domain
    window relabeled through the pairing)."""
    return LpOperator(a.space, a.p, tuple(pairing(k, d) for d in a.dom),
                      a.cod, a.matrix.copy())


def _group_scales(alphas, lams, p: float) -> list[float]:
    """Hoelder balancing: scales s with a -> a/s, u -> s u minimizing the
    analytic bound (sum (alpha/s)^q)^{1/q} (sum (s lam)^p)^{1/p}; the optimum
    value is sum alpha*lam."""
    q = conjugate(p)
    out = []
    for a, l in zip(alphas, lams):
        if a <= 0 or l <= 0:
            out.append(1.0)
        elif p == INF:
            out.append(1.0 / l)
        elif p == 1:
            out.append(a)
        else:
            out.append(float((a**q / l**p) ** (1.0 / (p + q))))
    return out


def canonical_prepresentation(rep: Representation, iso_offset: int = 0) -> PRepresentation:
    """Convert a general representation into p-convex form.

    Each term gets its own disjoint proper isometry; the operators are pulled
    back through the coisometries and summed, with Hoelder balancing so the
    analytic cost equals the cost of the input representation.
    """
    p = rep.p
    terms = [t for t in rep.terms if t.a.matrix.size and np.any(t.a.matrix)]
    if not terms:
        return PRepresentation(rep.E, rep.F, p, LpOperator.zero(p),
                               (), rep.quant_e, rep.quant_f, 0.0,
                               label="canonical(empty)")
    alphas = [t.a.norm_bracket().upper for t in terms]
    lams = [amp_norm(t.u, rep.quant_e).upper * amp_norm(t.v, rep.quant_f).upper
            for t in terms]
    scales = _group_scales(alphas, lams, p)
    a_total = None
    new_terms = []
    q = conjugate(p)
    scaled_alphas = []
    for k, (t, s) in enumerate(zip(terms, scales)):
        shifted = (1.0 / s) * _shift_through_star(t.a, k + iso_offset)
        a_total = shifted if a_total is None else a_total + shifted
        new_terms.append((ProperIsometry.standard(k + iso_offset), s * t.u, t.v))
        scaled_alphas.append(alphas[k] / s)
    hint = vector_pnorm(np.array(scaled_alphas), q)
    return PRepresentation(rep.E, rep.F, p, a_total, tuple(new_terms),
                           rep.quant_e, rep.quant_f, float(hint),
                           label=f"canonical({rep.label})")


# ---------------------------------------------------------------------------
# The exact lq oracle (conjugate exponents)


def _check_lq_conjugate(E: FiniteNormedSpace, F: FiniteNormedSpace, p: float,
                        tol: float = 1e-9) -> float:
    if not (1 < p < INF):
        raise UnsupportedCombination("the lq oracle needs 1 < p < inf")
    q = conjugate(p)
    for sp in (E, F):
        if sp.family != "lq":
            raise UnsupportedCombination("the lq oracle needs lq-family factors")
        if abs(sp.q - q) > tol:
            raise UnsupportedCombination(
                f"factor exponent {sp.q} is not conjugate to base exponent {p}")
    return q


def _kron_weights(E: FiniteNormedSpace, F: FiniteNormedSpace):
    if E.weights is None and F.weights is None:
        return None
    we = np.ones(E.dim) if E.weights is None else np.asarray(E.weights)
    wf = np.ones(F.dim) if F.weights is None else np.asarray(F.weights)
    return tuple(np.kron(we, wf))


def product_map_image(U: AmplifiedElement, E: FiniteNormedSpace,
                      F: FiniteNormedSpace) -> AmplifiedElement:
    """Image of U under (x, y) -> x*y into L (x) Lq(Y x Z), coordinatewise."""
    q = _check_lq_conjugate(E, F, U.p)
    carrier = lq_space(E.dim * F.dim, q, _kron_weights(E, F))
    return AmplifiedElement(U.space, U.p, carrier,
                            {a: r.copy() for a, r in U.rows.items()})


def thm64_oracle(U: AmplifiedElement, E: FiniteNormedSpace,
                 F: FiniteNormedSpace) -> NormBracket:
    """Certified p-convex norm for min-quantized lq factors, q = p/(p-1).

    The coordinatewise product identifies E (x) F with a subspace of
    Lq(Y x Z), and the p-convex norm of U equals the injective-quantization
    norm of the image, which reduces to a certified operator-norm bracket.
    """
    if U.is_zero:
        _check_lq_conjugate(E, F, U.p)
        return NormBracket.exact(0.0)
    return min_norm(product_map_image(U, E, F))


def oracle_prepresentation(U: AmplifiedElement, E: FiniteNormedSpace,
                           F: FiniteNormedSpace) -> PRepresentation:
    """One-term representation matching the lq oracle cost.

    With normalized coordinate vectors y_i = e_i / w_i^{1/q} the element
    u = sum_i e_i (x) y_i has injective norm one (the reduced matrix is the
    identity), likewise v, and the operator slot's matrix is exactly the
    reduced matrix whose bracket the oracle computes.
    """
    p = U.p
    _check_lq_conjugate(E, F, p)
    if not U.space.is_counting:
        raise UnsupportedCombination("the constructive path needs the counting base")
    q = conjugate(p)
    we = np.ones(E.dim) if E.weights is None else np.asarray(E.weights)
    wf = np.ones(F.dim) if F.weights is None else np.asarray(F.weights)
    u = AmplifiedElement(COUNTING, p, E,
                         {i: np.eye(E.dim)[i] * we[i] ** (-1.0 / q)
                          for i in range(E.dim)})
    v = AmplifiedElement(COUNTING, p, F,
                         {j: np.eye(F.dim)[j] * wf[j] ** (-1.0 / q)
                          for j in range(F.dim)})
    atoms, m = U.as_matrix()
    dom, cols = [], []
    for i in range(E.dim):
        for j in range(F.dim):
            c = i * F.dim + j
            col = m[:, c] * (we[i] * wf[j]) ** (1.0 / q)
            if np.any(col):
                dom.append(pairing(0, pairing(i, j)))
                cols.append(col)
    if not dom:
        return PRepresentation(E, F, p, LpOperator.zero(p), (), MIN, MIN, 0.0,
                               label="oracle(zero)")
    a = LpOperator(COUNTING, p, tuple(dom), atoms, np.stack(cols, axis=1))
    return PRepresentation(E, F, p, a, ((ProperIsometry.standard(0), u, v),),
                           MIN, MIN, label="oracle")


# ---------------------------------------------------------------------------
# Step-form instances (disjoint indicator blocks) and the constructive proof


@dataclass(frozen=True)
class StepFormInstance:
    """U = sum_{k,l} xi_{k,l} (x) (y_k (x) z_l) with y_k, z_l normalized
    indicators of pairwise disjoint coordinate blocks."""

    p: float
    E: FiniteNormedSpace
    F: FiniteNormedSpace
    y_blocks: tuple  # tuple of tuples of E-coordinate indices
    z_blocks: tuple
    xi: dict = field(default_factory=dict)  # (k, l) -> LpVector

    def __post_init__(self):
        _check_lq_conjugate(self.E, self.F, self.p)
        for blocks, dim, side in ((self.y_blocks, self.E.dim, "y"),
                                  (self.z_blocks, self.F.dim, "z")):
            seen = set()
            for blk in blocks:
                s = set(blk)
                if not s or (s & seen) or max(s) >= dim or min(s) < 0:
                    raise ValueError(f"{side}-blocks must be nonempty, disjoint "
                                     "index sets inside the factor")
                seen |= s
        for (k, l), xi in self.xi.items():
            if not (0 <= k < len(self.y_blocks) and 0 <= l < len(self.z_blocks)):
                raise ValueError("xi index outside the block grid")
            if xi.p != self.p:
                raise ValueError("xi exponent mismatch")

    def _indicator(self, space: FiniteNormedSpace, block) -> np.ndarray:
        q = conjugate(self.p)
        w = np.ones(space.dim) if space.weights is None else np.asarray(space.weights)
        c = float(sum(w[i] for i in block)) ** (-1.0 / q)
        y = np.zeros(space.dim)
        for i in block:
            y[i] = c
        return y

    def y_vector(self, k: int) -> np.ndarray:
        return self._indicator(self.E, self.y_blocks[k])

    def z_vector(self, l: int) -> np.ndarray:
        return self._indicator(self.F, self.z_blocks[l])

    def element(self) -> AmplifiedElement:
        rows = {}
        for (k, l), xi in self.xi.items():
            block = np.outer(self.y_vector(k), self.z_vector(l)).reshape(-1)
            for t, val in xi.entries.items():
                rows[t] = rows.get(t, np.zeros(self.E.dim * self.F.dim)) + val * block
        return AmplifiedElement(COUNTING, self.p,
                                tensor_space(self.E, self.F), rows)


def thm64_constructive(inst: StepFormInstance) -> PRepresentation:
    """One-term p-convex representation of a step-form element.

    u = sum_k e_k (x) y_k and v = sum_l e_l (x) z_l have injective norm one
    (disjoint unit blocks, with the conjugate-exponent identity making the
    block sums p-additive), and the operator sends e_{pairing(k, l)} to
    xi_{k,l}; its matrix coincides with the reduced matrix of the oracle, so
    the cost matches the oracle bracket's upper end.
    """
    p = inst.p
    u = AmplifiedElement(COUNTING, p, inst.E,
                         {k: inst.y_vector(k) for k in range(len(inst.y_blocks))})
    v = AmplifiedElement(COUNTING, p, inst.F,
                         {l: inst.z_vector(l) for l in range(len(inst.z_blocks))})
    dom, cols, cod = [], [], sorted({t for xi in inst.xi.values() for t in xi.entries})
    for (k, l), xi in sorted(inst.xi.items()):
        col = np.array([xi[t] for t in cod], dtype=float)
        if np.any(col):
            dom.append(pairing(0, pairing(k, l)))
            cols.append(col)
    if not dom:
        return PRepresentation(inst.E, inst.F, p, LpOperator.zero(p), (),
                               MIN, MIN, 0.0, label="step(zero)")
    a = LpOperator(COUNTING, p, tuple(dom), tuple(cod), np.stack(cols, axis=1))
    return PRepresentation(inst.E, inst.F, p, a,
                           ((ProperIsometry.standard(0), u, v),),
                           MIN, MIN, label="step")


# ---------------------------------------------------------------------------
# Norm search


def pconvex_norm_upper(U: AmplifiedElement, E: FiniteNormedSpace,
                       F: FiniteNormedSpace, quant_e: str = MIN,
                       quant_f: str = MIN, restarts: int = 6,
                       seed: int = 0) -> tuple[float, PRepresentation]:
    """Cost of the best p-convex representation found."""
    if U.is_zero:
        return 0.0, PRepresentation(E, F, U.p, LpOperator.zero(U.p), (),
                                    quant_e, quant_f, 0.0, label="zero")
    candidates = []
    _, grep = general_norm_upper(U, E, F, quant_e, quant_f,
                                 restarts=restarts, seed=seed)
    candidates.append(canonical_prepresentation(grep))
    if grep.label != "canonical":
        candidates.append(canonical_prepresentation(
            canonical_representation(U, E, F, quant_e, quant_f)))
    if quant_e == MIN and quant_f == MIN:
        try:
            candidates.append(oracle_prepresentation(U, E, F))
        except UnsupportedCombination:
            pass
    best, best_rep = np.inf, candidates[0]
    for rep in candidates:
        c = rep.cost()
        if c < best:
            best, best_rep = c, rep
    return float(best), best_rep


def pconvex_norm_lower(U: AmplifiedElement, E: FiniteNormedSpace,
                       F: FiniteNormedSpace, quant_e: str = MIN,
                       quant_f: str = MIN, seed: int = 0) -> float:
    """Product-functional witnesses, plus the lq-oracle map when it applies."""
    if U.is_zero:
        return 0.0
    lo = product_functional_lower(U, E, F, seed=seed)
    if quant_e == MIN and quant_f == MIN:
        try:
            lo = max(lo, thm64_oracle(U, E, F).lower)
        except UnsupportedCombination:
            pass
    return lo


def pconvex_norm_bracket(U: AmplifiedElement, E: FiniteNormedSpace,
                         F: FiniteNormedSpace, quant_e: str = MIN,
                         quant_f: str = MIN, restarts: int = 6,
                         seed: int = 0) -> NormBracket:
    upper, _ = pconvex_norm_upper(U, E, F, quant_e, quant_f,
                                  restarts=restarts, seed=seed)
    lower = pconvex_norm_lower(U, E, F, quant_e, quant_f, seed=seed)
    return NormBracket(min(lower, upper), max(lower, upper))


# ---------------------------------------------------------------------------
# Merging representations (triangle inequality and p-convexity)


def _fresh_indices(*reps: PRepresentation) -> tuple[int, int]:
    used = set()
    for r in reps:
        for iso, _, _ in r.terms:
            lbl = iso.label
            for part in lbl.replace("I_", " ").split():
                if part.isdigit():
                    used.add(int(part))
    k = max(used, default=-1) + 1
    return k, k + 1


def merge_prepresentations(rU: PRepresentation, rV: PRepresentation) -> PRepresentation:
    """Representation of U + V built from representations of U and V.

    Fresh disjoint isometries separate the two groups; the operators are
    pulled back through the coisometries and Hoelder-balanced so the merged
    cost is at most cost(U) + cost(V)."""
    if rU.p != rV.p or rU.quant_e != rV.quant_e or rU.quant_f != rV.quant_f:
        raise ValueError("representations are not compatible")
    p = rU.p
    kU, kV = _fresh_indices(rU, rV)
    alphas = [rU.a_upper(), rV.a_upper()]
    lams = [vector_pnorm(np.array(rU.term_weights() or [0.0]), p),
            vector_pnorm(np.array(rV.term_weights() or [0.0]), p)]
    sU, sV = _group_scales(alphas, lams, p)
    JU, JV = ProperIsometry.standard(kU), ProperIsometry.standard(kV)
    aU = (1.0 / sU) * _shift_through_star(rU.a, kU)
    aV = (1.0 / sV) * _shift_through_star(rV.a, kV)
    terms = tuple([(JU.compose(iso), sU * u, v) for iso, u, v in rU.terms]
                  + [(JV.compose(iso), sV * u, v) for iso, u, v in rV.terms])
    hint = vector_pnorm(np.array([alphas[0] / sU, alphas[1] / sV]), conjugate(p))
    return PRepresentation(rU.E, rU.F, p, aU + aV, terms, rU.quant_e,
                           rU.quant_f, float(hint),
                           label=f"merge({rU.label},{rV.label})")


def merge_orthogonal(rU: PRepresentation, rV: PRepresentation) -> PRepresentation:
    """Merge for orthogonally supported U, V: cost^p <= cost(U)^p + cost(V)^p.

    The operators are cut down by the disjoint support projections, so after
    normalizing both to norm at most one the merged operator still has norm
    at most one, and the term weights carry the whole cost."""
    if rU.p != rV.p or rU.quant_e != rV.quant_e or rU.quant_f != rV.quant_f:
        raise ValueError("representations are not compatible")
    p = rU.p
    suppU = set(rU.value().rows)
    suppV = set(rV.value().rows)
    if suppU & suppV:
        raise ValueError("values are not orthogonally supported")
    kU, kV = _fresh_indices(rU, rV)
    alphas = [rU.a_upper(), rV.a_upper()]
    sU = alphas[0] if alphas[0] > 0 else 1.0
    sV = alphas[1] if alphas[1] > 0 else 1.0
    PU = proper_projection(sorted(suppU), p)
    PV = proper_projection(sorted(suppV), p)
    aU = (1.0 / sU) * _shift_through_star(PU.compose(rU.a), kU)
    aV = (1.0 / sV) * _shift_through_star(PV.compose(rV.a), kV)
    JU, JV = ProperIsometry.standard(kU), ProperIsometry.standard(kV)
    terms = tuple([(JU.compose(iso), sU * u, v) for iso, u, v in rU.terms]
                  + [(JV.compose(iso), sV * u, v) for iso, u, v in rV.terms])
    return PRepresentation(rU.E, rU.F, p, aU + aV, terms, rU.quant_e,
                           rU.quant_f, 1.0,
                           label=f"orthomerge({rU.label},{rV.label})")


# ---------------------------------------------------------------------------
# p-convexity checks


@dataclass(frozen=True)
class SupportPair:
    """Two amplified elements with orthogonal proper supports."""

    u: AmplifiedElement
    v: AmplifiedElement
    P_u: LpOperator
    P_v: LpOperator

    def __post_init__(self):
        if set(self.P_u.dom) & set(self.P_v.dom):
            raise ValueError("support projections must be orthogonal")


def random_support_pair(E: FiniteNormedSpace, p: float, rng,
                        atoms_u=(0, 1, 2), atoms_v=(3, 4, 5)) -> SupportPair:
    if set(atoms_u) & set(atoms_v):
        raise ValueError("atom windows must be disjoint")
    u = AmplifiedElement(COUNTING, p, E,
                         {a: rng.standard_normal(E.dim) for a in atoms_u})
    v = AmplifiedElement(COUNTING, p, E,
                         {a: rng.standard_normal(E.dim) for a in atoms_v})
    return SupportPair(u, v, proper_projection(atoms_u, p),
                       proper_projection(atoms_v, p))


def pconvexity_check(E: FiniteNormedSpace, p: float, quant: str = MIN,
                     conv_p: float | None = None, trials: int = 50,
                     seed: int = 0, tol: float = 1e-9) -> dict:
    """Test ||u + v|| <= (||u||^p + ||v||^p)^{1/p} on orthogonal supports.

    Bracket-safe: violations are certified by comparing the lower end of the
    sum's norm against the upper ends of the summands."""
    conv_p = p if conv_p is None else conv_p
    rng = np.random.default_rng(seed)
    violations = []
    for t in range(trials):
        pair = random_support_pair(E, p, rng)
        nu = amp_norm(pair.u, quant).upper
        nv = amp_norm(pair.v, quant).upper
        bound = vector_pnorm(np.array([nu, nv]), conv_p)
        got = amp_norm(pair.u + pair.v, quant).lower
        if got > bound + tol:
            violations.append({"trial": t, "lower_sum": got, "bound": bound,
                               "gap": got - bound})
    return {"trials": trials, "p": conv_p, "quant": quant,
            "violations": violations, "passed": not violations}


def l1_max_counterexample(conv_p: float = 2.0) -> dict:
    """The projective quantization of l1 is not p-convex for p > 1.

    With u = e_0 (x) e_0 and v = e_1 (x) e_1 in L (x) l1^2 the projective
    norm of u + v is exactly 2 while the p-convexity bound is 2^{1/p}."""
    E = lq_space(2, 1)
    p = conv_p
    u = AmplifiedElement(COUNTING, p, E, {0: np.array([1.0, 0.0])})
    v = AmplifiedElement(COUNTING, p, E, {1: np.array([0.0, 1.0])})
    nu = max_norm(u).upper
    nv = max_norm(v).upper
    bound = vector_pnorm(np.array([nu, nv]), conv_p)
    got = max_norm(u + v).lower
    return {"p": conv_p, "lower_sum": got, "bound": bound, "gap": got - bound,
            "violation_found": got > bound + 1e-9}


# ---------------------------------------------------------------------------
# Kronecker products


def kron_operator(A: LpOperator, B: LpOperator) -> LpOperator:
    """A (x) B on the paired index set, e_{pairing(m, n)} ordering."""
    if A.p != B.p or A.space != B.space:
        raise ValueError("exponent or space mismatch")
    dom = tuple(pairing(da, db) for da in A.dom for db in B.dom)
    cod = tuple(pairing(ca, cb) for ca in A.cod for cb in B.cod)
    return LpOperator(A.space, A.p, dom, cod, np.kron(A.matrix, B.matrix))


def kron_norm_check(A: LpOperator, B: LpOperator, tol: float = 1e-9) -> dict:
    """Report on ||A (x) B|| <= ||A|| ||B|| (equality at p = 2)."""
    K = kron_operator(A, B)
    na, nb, nk = A.norm_bracket(), B.norm_bracket(), K.norm_bracket()
    bound = na.upper * nb.upper
    out = {"p": None if A.p == INF else A.p,
           "norm_a": na.to_json(), "norm_b": nb.to_json(),
           "norm_kron": nk.to_json(), "product_upper": bound,
           "inequality_holds": nk.lower <= bound + tol}
    if A.p == 2:
        prod = na.lower * nb.lower
        out["product_lower"] = prod
        out["equality_holds"] = abs(nk.lower - prod) <= tol * max(1.0, prod)
    return out
