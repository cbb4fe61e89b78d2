import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multinorm.lpcore import (INF, LpOperator, LpVector, NormBracket,
                              ProperIsometry, basis_vector, conjugate,
                              disjoint_isometries, lp_norm,
                              operator_norm_bracket, opnorm_bracket,
                              proper_projection, vector_pnorm)
from multinorm.measure import (COUNTING, UnsupportedCombination, finite_space,
                               pairing)

# Operator p-norms of two fixed matrices, obtained independently by
# multi-start direct maximization of ||Mx||_p / ||x||_p (Nelder-Mead over
# 30 random starts, 2e5-sample random search cross-check).
ORACLE_M1 = np.array([[1.0, 2.0], [3.0, 4.0]])
ORACLE_M2 = np.array([[1.0, -1.0, 0.5], [0.2, 2.0, -0.3], [0.0, 1.0, 1.0]])
ORACLE_VALUES = {
    (1, 1.5): 5.3725145399986,
    (1, 3.0): 5.7331095248145,
    (2, 1.5): 2.8599257384696,
    (2, 3.0): 2.2487663693259,
}


def test_conjugate_exponents():
    assert conjugate(1.0) == INF
    assert conjugate(INF) == 1.0
    assert conjugate(2.0) == 2.0
    assert conjugate(1.5) == pytest.approx(3.0)


def test_vector_norms():
    v = LpVector(COUNTING, 2.0, {0: 3.0, 1: 4.0})
    assert lp_norm(v) == pytest.approx(5.0)
    v = LpVector(COUNTING, INF, {0: 3.0, 1: 4.0})
    assert v.norm() == pytest.approx(4.0)
    sp = finite_space({"a": 2.0, "b": 0.5})
    v = LpVector(sp, 2.0, {"a": 1.0, "b": 2.0})
    assert v.norm() == pytest.approx(2.0)  # (2*1 + 0.5*4)^{1/2}


def test_vector_support_validation():
    sp = finite_space({"a": 1.0})
    with pytest.raises(ValueError):
        LpVector(sp, 2.0, {"b": 1.0})


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6),
       st.lists(st.floats(-10, 10), min_size=1, max_size=6),
       st.sampled_from([1.0, 1.5, 2.0, 3.0, INF]))
@settings(max_examples=60, deadline=None)
def test_vector_norm_triangle_inequality(xs, ys, p):
    n = max(len(xs), len(ys))
    xs = xs + [0.0] * (n - len(xs))
    ys = ys + [0.0] * (n - len(ys))
    u = LpVector(COUNTING, p, dict(enumerate(xs)))
    v = LpVector(COUNTING, p, dict(enumerate(ys)))
    assert (u + v).norm() <= u.norm() + v.norm() + 1e-9


def test_opnorm_exact_closed_forms():
    M = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert opnorm_bracket(M, 1.0).lower == pytest.approx(1.0)
    assert opnorm_bracket(M, 1.0).is_exact
    b2 = opnorm_bracket(M, 2.0)
    assert b2.is_exact and b2.lower == pytest.approx(math.sqrt(2.0))
    binf = opnorm_bracket(M, INF)
    assert binf.is_exact and binf.lower == pytest.approx(2.0)


def test_opnorm_row_matrix_analytic():
    # a single-row matrix acts as a functional: norm = dual norm of the row
    M = np.array([[1.0, 1.0]])
    for p, want in [(1.5, 2.0 ** (1.0 / 3.0)), (3.0, 2.0 ** (2.0 / 3.0))]:
        nb = opnorm_bracket(M, p)
        assert nb.lower <= want + 1e-9
        assert nb.upper >= want - 1e-9
        assert nb.width <= 1e-8


def test_opnorm_bracket_contains_frozen_oracles():
    for (which, p), want in ORACLE_VALUES.items():
        M = ORACLE_M1 if which == 1 else ORACLE_M2
        nb = opnorm_bracket(M, p)
        assert nb.contains(want, tol=1e-6), (which, p, nb, want)
        if which == 1:  # nonnegative matrix: certificate collapses the bracket
            assert nb.width <= 1e-8 * want


def test_opnorm_collatz_wielandt_matches_svd_at_2():
    rng = np.random.default_rng(0)
    for _ in range(20):
        M = np.abs(rng.standard_normal((3, 3)))
        nb = opnorm_bracket(M, 2.0)
        want = np.linalg.svd(M, compute_uv=False)[0]
        assert nb.lower == pytest.approx(want, rel=1e-9)


def test_opnorm_mixed_exponents_sound():
    rng = np.random.default_rng(1)
    for _ in range(10):
        M = rng.standard_normal((3, 4))
        r, p = 3.0, 1.5
        nb = opnorm_bracket(M, p, r=r)
        # every witness is below the certified upper end
        for _ in range(50):
            x = rng.standard_normal(4)
            val = vector_pnorm(M @ x, p) / vector_pnorm(x, r)
            assert val <= nb.upper + 1e-9
        assert nb.lower <= nb.upper


def test_bracket_invariants():
    nb = NormBracket(1.0, 2.0)
    assert nb.scale(3.0) == NormBracket(3.0, 6.0)
    assert (nb * NormBracket(2.0, 2.0)) == NormBracket(2.0, 4.0)
    assert nb.hull(NormBracket(0.5, 1.5)) == NormBracket(0.5, 2.0)
    assert nb.intersect(NormBracket(1.5, 3.0)) == NormBracket(1.5, 2.0)
    assert nb.contains(1.5) and not nb.contains(2.5)
    with pytest.raises(ValueError):
        NormBracket(2.0, 1.0)
    # tiny float inversions collapse instead of failing
    assert NormBracket(1.0, 1.0 - 1e-12).is_exact


def test_operator_apply_and_window_algebra():
    p = 2.0
    a = LpOperator(COUNTING, p, (0, 1), (2, 3), np.array([[1.0, 2.0], [0.0, 1.0]]))
    v = LpVector(COUNTING, p, {0: 1.0, 1: 1.0})
    assert a.apply(v).entries == {2: 3.0, 3: 1.0}
    # acts as zero outside the window
    assert a.apply(LpVector(COUNTING, p, {7: 5.0})).entries == {}

    b = LpOperator(COUNTING, p, (2, 3), (0,), np.array([[1.0, 1.0]]))
    comp = b.compose(a)
    assert comp.apply(v).entries == {0: 4.0}

    s = a + LpOperator(COUNTING, p, (1, 4), (2,), np.array([[1.0, 1.0]]))
    got = s.apply(LpVector(COUNTING, p, {0: 1.0, 1: 1.0, 4: 1.0}))
    assert got.entries == {2: 5.0, 3: 1.0}


def test_operator_norm_weighted_scaling():
    sp = finite_space({"a": 4.0, "b": 1.0})
    a = LpOperator(sp, 2.0, ("a",), ("b",), np.array([[1.0]]))
    # e_a has norm 2, its image e_b has norm 1: operator norm is 1/2
    nb = operator_norm_bracket(a)
    assert nb.is_exact and nb.lower == pytest.approx(0.5)


def test_rank_one_and_projection():
    p = 3.0
    out = LpVector(COUNTING, p, {1: 1.0, 2: -2.0})
    a = LpOperator.rank_one(out, 5, p)
    assert a.apply(basis_vector(5, p)).entries == {1: 1.0, 2: -2.0}
    nb = a.norm_bracket()
    assert nb.contains(out.norm(), tol=1e-9) and nb.width <= 1e-8

    pr = proper_projection((0, 2), p)
    v = LpVector(COUNTING, p, {0: 1.0, 1: 1.0, 2: 1.0})
    assert pr.apply(v).entries == {0: 1.0, 2: 1.0}


def test_proper_isometries_disjoint_family():
    p = 1.5
    iso = disjoint_isometries(3)
    v = LpVector(COUNTING, p, {0: 1.0, 4: -2.0, 7: 0.5})
    for I in iso:
        assert I.apply(v).norm() == pytest.approx(v.norm())
    # I_k^star I_l = delta_{kl} id on finite supports
    for k, Ik in enumerate(iso):
        for l, Il in enumerate(iso):
            w = Ik.star_apply(Il.apply(v))
            if k == l:
                assert (w - v).norm() == pytest.approx(0.0)
            else:
                assert w.entries == {}


def test_disjoint_isometries_need_counting_space():
    with pytest.raises(UnsupportedCombination):
        disjoint_isometries(2, finite_space({"a": 1.0}))


def test_isometry_operator_views():
    p = 2.0
    I = ProperIsometry.standard(2)
    window = (0, 1, 5)
    op = I.as_operator(window, p)
    star = I.star_as_operator(window, p)
    v = LpVector(COUNTING, p, {0: 1.0, 5: 2.0})
    assert op.apply(v).entries == {pairing(2, 0): 1.0, pairing(2, 5): 2.0}
    assert (star.apply(op.apply(v)) - v).norm() == pytest.approx(0.0)


def test_json_round_trips():
    v = LpVector(COUNTING, 1.5, {0: 1.0, 3: -2.5})
    assert LpVector.from_json(v.to_json()).entries == v.entries
    a = LpOperator(COUNTING, INF, (0, 1), (2,), np.array([[1.0, -1.0]]))
    b = LpOperator.from_json(a.to_json())
    assert b.dom == a.dom and b.cod == a.cod
    assert np.allclose(b.matrix, a.matrix)
