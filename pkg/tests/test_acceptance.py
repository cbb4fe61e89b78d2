"""Acceptance gate: ten end-to-end criteria, one pass/fail line each.

Each test prints a single summary line (always, via capsys.disabled) and
asserts the criterion at its stated tolerance and runtime bound.
"""

import json
import time

import numpy as np
import pytest

from multinorm.amplify import (MAX, MIN, AmplifiedElement,
                               lbounded_norm_linear, max_norm, min_norm,
                               product_functional_lbounded_norm)
from multinorm.cli import (main, suite_contractive_module,
                           suite_diamond_metric, suite_kron, suite_pconvex,
                           suite_pconvex_counterexample, suite_thm47,
                           suite_thm64, suite_triangle)
from multinorm.lpcore import COUNTING
from multinorm.normed import lq_space
from multinorm.pctensor import l1_max_counterexample


def _report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_01_diamond_metric(capsys):
    start = time.monotonic()
    rep = suite_diamond_metric(500, seed=0)
    elapsed = time.monotonic() - start
    ok = rep["passed"] and elapsed < 1.0
    _report(capsys, "1 diamond metric",
            ok, f"500 pairs, max rel err {rep['max_rel_err']:.2e}, "
                f"{elapsed:.2f}s (< 1s)")


def test_criterion_02_contractive_module(capsys):
    # 200 random (a, u) pairs per quantization {min, max}
    start = time.monotonic()
    rep = suite_contractive_module(400, seed=0)
    elapsed = time.monotonic() - start
    ok = rep["passed"] and elapsed < 30.0
    _report(capsys, "2 contractive module",
            ok, f"400 trials (200/quant), {len(rep['violations'])} violations, "
                f"{elapsed:.1f}s (< 30s)")


def test_criterion_03_functional_exactness(capsys):
    rng = np.random.default_rng(0)
    worst_dual = worst_prod = 0.0
    for t in range(50):
        q = [1.0, 2.0, 4.0][t % 3]
        E = lq_space(3, q)
        F = lq_space(3, [2.0, 4.0, 1.0][t % 3])
        f = rng.standard_normal(3)
        g = rng.standard_normal(3)
        for quant in (MIN, MAX):
            nb = lbounded_norm_linear(f, E, quant_e=quant)
            want = E.dual_norm(f).upper
            worst_dual = max(worst_dual, nb.width,
                             abs(nb.upper - want) / max(1.0, want))
        pf = product_functional_lbounded_norm(f, E, g, F)
        wp = E.dual_norm(f).upper * F.dual_norm(g).upper
        worst_prod = max(worst_prod, abs(pf.upper - wp) / max(1.0, wp))
    ok = worst_dual <= 1e-9 and worst_prod <= 1e-9
    _report(capsys, "3 functional exactness",
            ok, f"50 functionals, dual err {worst_dual:.2e}, "
                f"product err {worst_prod:.2e} (tol 1e-9)")


def test_criterion_04_hilbert_oracles(capsys):
    rng = np.random.default_rng(0)
    start = time.monotonic()
    worst = 0.0
    for _ in range(100):
        M = rng.standard_normal((4, 4))
        U = AmplifiedElement(COUNTING, 2.0, lq_space(4, 2),
                             {i: M[i] for i in range(4)})
        sv = np.linalg.svd(M, compute_uv=False)
        spec, nuc = float(sv[0]), float(sv.sum())
        mn = min_norm(U)
        mx = max_norm(U)
        worst = max(worst,
                    abs(mn.lower - spec) / spec, abs(mn.upper - spec) / spec,
                    abs(mx.lower - nuc) / nuc, abs(mx.upper - nuc) / nuc)
    elapsed = time.monotonic() - start
    ok = worst <= 1e-6 and elapsed < 60.0
    _report(capsys, "4 Hilbert oracles",
            ok, f"100 4x4 instances, max rel err {worst:.2e} (tol 1e-6), "
                f"{elapsed:.1f}s (< 60s)")


def test_criterion_05_maxleft_overlap_and_hilbert_equality(capsys):
    rep = suite_thm47(50, seed=0)
    ok = rep["passed"]
    _report(capsys, "5 max-left tensor norm",
            ok, f"50 instances, {len(rep['overlap_failures'])} overlap "
                f"failures, Hilbert rel err "
                f"{rep['max_hilbert_rel_err']:.2e} (tol 1e-6)")


def test_criterion_06_pconvexity_and_counterexample(capsys):
    rep = suite_pconvex(300, seed=0)
    cx = l1_max_counterexample()
    ok = rep["passed"] and cx["violation_found"] and cx["gap"] >= 0.58
    _report(capsys, "6 p-convexity",
            ok, f"{rep['trials']} pairs, {len(rep['violations'])} violations; "
                f"l1-max counterexample gap {cx['gap']:.6f} (>= 0.58)")


def test_criterion_07_triangle_merge(capsys):
    rep = suite_triangle(100, seed=0)
    ok = rep["passed"]
    _report(capsys, "7 triangle merge",
            ok, f"100 pairs, max excess {rep['max_excess']:.2e} (tol 1e-9)")


def test_criterion_08_step_form_squeeze(capsys):
    start = time.monotonic()
    rep = suite_thm64(30, seed=0)
    elapsed = time.monotonic() - start
    ok = rep["passed"] and elapsed < 300.0
    _report(capsys, "8 step-form squeeze",
            ok, f"30 instances, max rel gap {rep['max_rel_gap']:.2e} "
                f"(tol 1e-6), {elapsed:.1f}s (< 300s)")


def test_criterion_09_kronecker(capsys):
    rep = suite_kron(100, seed=0)
    ok = rep["passed"]
    _report(capsys, "9 Kronecker norms",
            ok, f"100 pairs at p in {{1, 2, inf}}, "
                f"{len(rep['failures'])} failures (incl. p=2 equality)")


def test_criterion_10_determinism(capsys, tmp_path):
    suites = ["diamond-metric", "thm64", "pconvex-counterexample"]
    identical = True
    for s in suites:
        a, b = tmp_path / f"{s}-a.json", tmp_path / f"{s}-b.json"
        argv = ["verify", "--suite", s, "--trials", "5", "--seed", "11"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        identical &= a.read_bytes() == b.read_bytes()
    _report(capsys, "10 determinism",
            identical, f"{len(suites)} suites re-run with fixed seed, "
                       "byte-identical JSON reports")
