import numpy as np
import pytest

from multinorm.amplify import MAX, MIN, AmplifiedElement, amp_norm, module_action
from multinorm.diamond import diamond_amp
from multinorm.gtensor import canonical_representation, general_norm_upper
from multinorm.lpcore import INF, LpOperator, LpVector, vector_pnorm
from multinorm.measure import COUNTING, UnsupportedCombination
from multinorm.normed import lq_space
from multinorm.pctensor import (PRepresentation, StepFormInstance,
                                canonical_prepresentation, kron_norm_check,
                                kron_operator, l1_max_counterexample,
                                merge_orthogonal, merge_prepresentations,
                                oracle_prepresentation, pconvex_norm_lower,
                                pconvex_norm_upper, pconvexity_check,
                                random_support_pair, thm64_constructive,
                                thm64_oracle)


def _elem(rng, p, E, atoms):
    return AmplifiedElement(COUNTING, p, E,
                            {int(a): rng.standard_normal(E.dim) for a in atoms})


def _rand_tensor(rng, p, E, F, atoms):
    U = AmplifiedElement.zero(lq_space(E.dim * F.dim, 2), p)
    for a in atoms:
        U = U + diamond_amp(_elem(rng, p, E, [a]), _elem(rng, p, F, [a + 1]))
    return U


def test_canonical_prepresentation_value_and_cost():
    rng = np.random.default_rng(0)
    E, F = lq_space(2, 2), lq_space(2, 2)
    for p in [1.0, 1.5, 2.0, 3.0, INF]:
        U = _rand_tensor(rng, p, E, F, [0, 2])
        grep = canonical_representation(U, E, F)
        prep = canonical_prepresentation(grep)
        assert prep.verify(U)
        # Hoelder balancing makes the converted cost match the general cost
        assert prep.cost() <= grep.cost() + 1e-9 * max(1.0, grep.cost())


def test_single_term_conversion():
    E, F = lq_space(2, 2), lq_space(2, 2)
    e0 = LpVector(COUNTING, 2.0, {0: 1.0})
    U = diamond_amp(AmplifiedElement.elementary(e0, np.array([1.0, 1.0]), E),
                    AmplifiedElement.elementary(e0, np.array([1.0, 0.0]), F))
    _, grep = general_norm_upper(U, E, F)
    prep = canonical_prepresentation(grep)
    assert len(prep.terms) == 1
    assert prep.verify(U)


def test_empty_conversion():
    E, F = lq_space(2, 2), lq_space(2, 2)
    Z = AmplifiedElement.zero(lq_space(4, 2), 2.0)
    prep = canonical_prepresentation(canonical_representation(Z, E, F))
    assert prep.cost() == 0.0 and prep.value().is_zero


def test_disjointness_is_enforced():
    E, F = lq_space(2, 2), lq_space(2, 2)
    p = 2.0
    e0 = LpVector(COUNTING, p, {0: 1.0})
    u = AmplifiedElement.elementary(e0, np.array([1.0, 0.0]), E)
    v = AmplifiedElement.elementary(e0, np.array([1.0, 0.0]), F)
    from multinorm.lpcore import ProperIsometry
    I = ProperIsometry.standard(0)
    bad = PRepresentation(E, F, p, LpOperator.identity((0,), p),
                          ((I, u, v), (I, u, v)))
    with pytest.raises(ValueError):
        bad.value()


def test_pconvex_cross_norm_inequalities():
    rng = np.random.default_rng(1)
    for p in [1.0, 1.5, 2.0, 3.0, INF]:
        E, F = lq_space(2, 2), lq_space(2, 2)
        u = _elem(rng, p, E, [0, 3])
        v = _elem(rng, p, F, [1, 2])
        U = diamond_amp(u, v)
        up, rep = pconvex_norm_upper(U, E, F)
        assert rep.verify(U)
        assert up <= amp_norm(u, MIN).upper * amp_norm(v, MIN).upper + 1e-9
        lo = pconvex_norm_lower(U, E, F)
        assert lo <= up + 1e-9


def test_pconvex_upper_never_above_general_upper():
    rng = np.random.default_rng(2)
    E, F = lq_space(2, 2), lq_space(2, 2)
    for p in [1.5, 2.0, 3.0]:
        U = _rand_tensor(rng, p, E, F, [0, 2])
        gup, _ = general_norm_upper(U, E, F)
        pup, _ = pconvex_norm_upper(U, E, F)
        assert pup <= gup + 1e-9 * max(1.0, gup)


def test_oracle_requires_conjugate_lq_factors():
    U = AmplifiedElement(COUNTING, 2.0, lq_space(4, 2), {0: [1.0, 0, 0, 0]})
    with pytest.raises(UnsupportedCombination):
        thm64_oracle(U, lq_space(2, 3), lq_space(2, 2))
    U1 = AmplifiedElement(COUNTING, 1.0, lq_space(4, 2), {0: [1.0, 0, 0, 0]})
    with pytest.raises(UnsupportedCombination):
        thm64_oracle(U1, lq_space(2, INF), lq_space(2, INF))


def test_oracle_elementary_tensor_is_product_norm():
    for p in [1.5, 2.0, 3.0]:
        q = p / (p - 1.0)
        E, F = lq_space(2, q), lq_space(3, q)
        x, y = np.array([1.0, 2.0]), np.array([0.5, 1.0, 0.0])
        e0 = LpVector(COUNTING, p, {0: 1.0})
        U = diamond_amp(AmplifiedElement.elementary(e0, x, E),
                        AmplifiedElement.elementary(e0, y, F))
        nb = thm64_oracle(U, E, F)
        want = E.norm(x) * F.norm(y)
        assert nb.contains(want, tol=1e-9)
        assert nb.width <= 1e-8 * want


def test_oracle_disjoint_indicators_spectral_example():
    # p = q = 2: two orthogonal elementary blocks on disjoint coordinates
    E, F = lq_space(2, 2), lq_space(2, 2)
    p = 2.0
    rows = {0: np.array([1.0, 0.0, 0.0, 0.0]),
            1: np.array([0.0, 0.0, 0.0, 1.0])}
    U = AmplifiedElement(COUNTING, p, lq_space(4, 2), rows)
    nb = thm64_oracle(U, E, F)
    # the associated operator is a 2-column isometry-like matrix of norm 1
    assert nb.lower == pytest.approx(1.0) and nb.upper == pytest.approx(1.0)


def test_oracle_prepresentation_matches_oracle():
    rng = np.random.default_rng(3)
    for p in [1.5, 2.0, 3.0]:
        q = p / (p - 1.0)
        E = lq_space(2, q, [1.0, 2.0])
        F = lq_space(2, q)
        rows = {t: np.abs(rng.standard_normal(4)) for t in [0, 1, 4]}
        U = AmplifiedElement(COUNTING, p, lq_space(4, 2), rows)
        rep = oracle_prepresentation(U, E, F)
        assert rep.verify(U)
        orc = thm64_oracle(U, E, F)
        assert rep.cost() <= orc.upper * (1.0 + 1e-9)
        assert rep.cost() >= orc.lower * (1.0 - 1e-9)


def test_step_form_validation():
    E, F = lq_space(2, 2), lq_space(2, 2)
    with pytest.raises(ValueError):  # overlapping y-blocks
        StepFormInstance(2.0, E, F, ((0,), (0, 1)), ((0,),),
                         {(0, 0): LpVector(COUNTING, 2.0, {0: 1.0})})
    with pytest.raises(ValueError):  # xi index outside grid
        StepFormInstance(2.0, E, F, ((0,),), ((0,),),
                         {(1, 0): LpVector(COUNTING, 2.0, {0: 1.0})})
    with pytest.raises(UnsupportedCombination):  # non-conjugate exponents
        StepFormInstance(2.0, lq_space(2, 3), F, ((0,),), ((0,),), {})


def test_step_form_single_block_cost_is_xi_norm():
    p = 2.0
    inst = StepFormInstance(p, lq_space(3, 2.0), lq_space(2, 2.0),
                            ((0, 1),), ((1,),),
                            {(0, 0): LpVector(COUNTING, p, {2: 3.0, 5: 4.0})})
    rep = thm64_constructive(inst)
    U = inst.element()
    assert rep.verify(U)
    assert rep.cost() == pytest.approx(5.0, rel=1e-9)
    nb = thm64_oracle(U, inst.E, inst.F)
    assert nb.contains(5.0, tol=1e-8)


def test_step_form_squeeze_small():
    rng = np.random.default_rng(4)
    for p in [1.5, 2.0, 3.0]:
        q = p / (p - 1.0)
        inst = StepFormInstance(
            p, lq_space(3, q, [1.0, 0.5, 2.0]), lq_space(3, q),
            ((0, 1), (2,)), ((0,), (1, 2)),
            {(0, 0): LpVector(COUNTING, p, {0: 1.0, 2: 0.5}),
             (1, 1): LpVector(COUNTING, p, {1: 2.0}),
             (0, 1): LpVector(COUNTING, p, {3: 0.7})})
        U = inst.element()
        rep = thm64_constructive(inst)
        assert rep.verify(U)
        orc = thm64_oracle(U, inst.E, inst.F)
        up, _ = pconvex_norm_upper(U, inst.E, inst.F)
        lo = pconvex_norm_lower(U, inst.E, inst.F)
        assert up - orc.lower <= 1e-6 * orc.lower
        assert lo >= orc.lower - 1e-9
        assert rep.cost() <= orc.upper * (1 + 1e-9)


def test_merge_triangle_bound():
    rng = np.random.default_rng(5)
    E, F = lq_space(2, 2), lq_space(2, 2)
    for p in [1.5, 2.0, 3.0, INF]:
        U = _rand_tensor(rng, p, E, F, [0])
        V = _rand_tensor(rng, p, E, F, [2])
        rU = canonical_prepresentation(canonical_representation(U, E, F))
        rV = canonical_prepresentation(canonical_representation(V, E, F))
        m = merge_prepresentations(rU, rV)
        assert m.verify(U + V)
        assert m.cost() <= rU.cost() + rV.cost() + 1e-9


def test_merge_orthogonal_pconvex_bound():
    rng = np.random.default_rng(6)
    E, F = lq_space(2, 2), lq_space(2, 2)
    for p in [1.5, 2.0, 3.0]:
        U = _rand_tensor(rng, p, E, F, [0])
        V = _rand_tensor(rng, p, E, F, [4])
        rU = canonical_prepresentation(canonical_representation(U, E, F))
        rV = canonical_prepresentation(canonical_representation(V, E, F))
        m = merge_orthogonal(rU, rV)
        assert m.verify(U + V)
        bound = vector_pnorm(np.array([rU.cost(), rV.cost()]), p)
        assert m.cost() <= bound + 1e-9


def test_merge_orthogonal_rejects_overlap():
    rng = np.random.default_rng(7)
    E, F = lq_space(2, 2), lq_space(2, 2)
    U = _rand_tensor(rng, 2.0, E, F, [0])
    rU = canonical_prepresentation(canonical_representation(U, E, F))
    with pytest.raises(ValueError):
        merge_orthogonal(rU, rU)


def test_pconvexity_of_min_quantization():
    for q in [1.5, 2.0, 3.0]:
        rep = pconvexity_check(lq_space(3, q), q, quant=MIN, trials=20, seed=0)
        assert rep["passed"], rep["violations"]


def test_pconvexity_trivial_zero_summand():
    E = lq_space(2, 2)
    p = 2.0
    rng = np.random.default_rng(8)
    pair = random_support_pair(E, p, rng)
    z = AmplifiedElement.zero(E, p)
    nu = amp_norm(pair.u, MIN).upper
    assert amp_norm(pair.u + z, MIN).lower <= nu + 1e-9


def test_l1_max_counterexample_found():
    rep = l1_max_counterexample()
    assert rep["violation_found"]
    assert rep["lower_sum"] == pytest.approx(2.0)
    assert rep["bound"] == pytest.approx(np.sqrt(2.0))
    assert rep["gap"] >= 0.58


def test_module_bound_via_transport():
    rng = np.random.default_rng(9)
    E, F = lq_space(2, 2), lq_space(2, 2)
    for p in [1.5, 2.0, 3.0]:
        U = _rand_tensor(rng, p, E, F, [0, 2])
        up, rep = pconvex_norm_upper(U, E, F)
        b = LpOperator(COUNTING, p, tuple(range(6)), (0, 3),
                       rng.standard_normal((2, 6)))
        moved = rep.transport(b)
        assert moved.verify(module_action(b, U))
        assert moved.cost() <= b.norm_bracket().upper * up + 1e-9


def test_kron_examples():
    p = 2.0
    I = LpOperator.identity((0, 1), p)
    rep = kron_norm_check(I, I)
    assert rep["inequality_holds"] and rep["equality_holds"]
    Z = LpOperator(COUNTING, p, (0,), (0,), np.zeros((1, 1)))
    rep = kron_norm_check(Z, I)
    assert rep["inequality_holds"]


def test_kron_random_exponents():
    rng = np.random.default_rng(10)
    for p in [1.0, 2.0, INF]:
        for _ in range(10):
            A = LpOperator(COUNTING, p, (0, 1), (0, 1), rng.standard_normal((2, 2)))
            B = LpOperator(COUNTING, p, (0, 1), (0, 1), rng.standard_normal((2, 2)))
            rep = kron_norm_check(A, B)
            assert rep["inequality_holds"]
            if p == 2.0:
                assert rep["equality_holds"]


def test_kron_operator_action_is_tensorial():
    p = 2.0
    rng = np.random.default_rng(11)
    A = LpOperator(COUNTING, p, (0, 1), (0, 1), rng.standard_normal((2, 2)))
    B = LpOperator(COUNTING, p, (0, 1), (0, 1), rng.standard_normal((2, 2)))
    K = kron_operator(A, B)
    from multinorm.diamond import diamond_base
    x = LpVector(COUNTING, p, {0: 1.0, 1: 2.0})
    y = LpVector(COUNTING, p, {0: -1.0, 1: 0.5})
    got = K.apply(diamond_base(x, y))
    want = diamond_base(A.apply(x), B.apply(y))
    assert (got - want).norm() == pytest.approx(0.0, abs=1e-12)


def test_nondegenerate_lower_on_random_instances():
    rng = np.random.default_rng(12)
    E, F = lq_space(2, 2), lq_space(2, 2)
    for _ in range(20):
        U = _rand_tensor(rng, 2.0, E, F, [int(rng.integers(0, 3))])
        if not U.is_zero:
            assert pconvex_norm_lower(U, E, F) > 0.0
