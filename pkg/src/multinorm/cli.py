"""Command-line front end: instance I/O, norm computation, property suites.

Exit codes: 0 pass, 1 property violation, 2 usage error (bad flags, missing
or malformed instance file), 3 precondition error (instance outside the
supported combinations).  All randomness flows from the --seed flag; reports
are emitted as canonical JSON (sorted keys) so identical runs are
byte-identical.  MULTINORM_THREADS caps the number of worker threads used to
run independent suite trials.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .amplify import (MAX, MIN, AmplifiedElement, amp_norm, beta_norm,
                      lbounded_norm_linear, max_norm, min_norm, module_action,
                      product_functional_lbounded_norm)
from .diamond import diamond_amp, diamond_base
from .gtensor import general_norm_bracket, general_norm_upper, maxleft_norm
from .lpcore import INF, LpOperator, LpVector, vector_pnorm
from .measure import COUNTING, UnsupportedCombination
from .normed import FiniteNormedSpace, lq_space
from .pctensor import (StepFormInstance, canonical_prepresentation,
                       kron_norm_check, l1_max_counterexample,
                       merge_prepresentations, pconvex_norm_bracket,
                       pconvex_norm_lower, pconvex_norm_upper,
                       pconvexity_check, thm64_oracle)
from .gtensor import canonical_representation

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3


class UsageError(Exception):
    pass


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("MULTINORM_THREADS", "1")))
    except ValueError:
        return 1


def _run_trials(fn, count: int):
    """Run fn(t) for t in range(count), optionally on a thread pool; the
    result list is always in trial order, so reports are deterministic."""
    cap = _thread_cap()
    if cap <= 1 or count <= 1:
        return [fn(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, range(count)))


# ---------------------------------------------------------------------------
# Instance I/O


def _load_json(path: str) -> tuple[dict, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read instance file {path}: {exc}")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path} at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}")
    digest = hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    return obj, digest


def _parse_instance(obj: dict):
    """Returns (U, E, F-or-None).  Rows live over E when F is absent, over
    the E (x) F coordinate grid when F is present."""
    try:
        p = INF if obj.get("p") in (None, "inf") else float(obj["p"])
        E = FiniteNormedSpace.from_json(obj["E"])
        F = FiniteNormedSpace.from_json(obj["F"]) if "F" in obj else None
        carrier = E if F is None else lq_space(E.dim * F.dim, 2)
        rows = {int(a): np.asarray(r, dtype=float)
                for a, r in obj.get("rows", {}).items()}
        return AmplifiedElement(COUNTING, p, carrier, rows), E, F
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad instance: {exc}")


# ---------------------------------------------------------------------------
# Report emission


def _emit(report: dict, args) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        lines = ["key,value"]
        for k in sorted(report):
            lines.append(f"{k},{json.dumps(report[k], sort_keys=True)}")
        text = "\n".join(lines) + "\n"
    else:  # aligned table
        width = max((len(k) for k in report), default=0)
        text = "".join(f"{k.ljust(width)}  {json.dumps(report[k], sort_keys=True)}\n"
                       for k in sorted(report))
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# norm / gnorm / pnorm commands


def cmd_norm(args) -> int:
    obj, digest = _load_json(args.instance)
    U, E, F = _parse_instance(obj)
    quant = args.quant
    report = {"command": "norm", "quant": quant, "seed": args.seed,
              "instance": digest}
    if quant in (MIN, MAX):
        nb = min_norm(U) if quant == MIN else max_norm(U, restarts=args.restarts,
                                                       seed=args.seed)
    elif quant == "beta":
        if F is None:
            raise UsageError("beta needs both factor spaces E and F")
        nb = beta_norm(U, E, F, quant_f=args.quant_f,
                       restarts=args.restarts, seed=args.seed)
    elif quant == "gnorm":
        if F is None:
            raise UsageError("gnorm needs both factor spaces E and F")
        nb = general_norm_bracket(U, E, F, args.quant_e, args.quant_f,
                                  restarts=args.restarts, seed=args.seed)
        cost, rep = general_norm_upper(U, E, F, args.quant_e, args.quant_f,
                                       restarts=args.restarts, seed=args.seed)
        report["best_representation"] = {"label": rep.label,
                                         "terms": len(rep.terms), "cost": cost}
    elif quant == "pnorm":
        if F is None:
            raise UsageError("pnorm needs both factor spaces E and F")
        nb = pconvex_norm_bracket(U, E, F, args.quant_e, args.quant_f,
                                  restarts=args.restarts, seed=args.seed)
        cost, rep = pconvex_norm_upper(U, E, F, args.quant_e, args.quant_f,
                                       restarts=args.restarts, seed=args.seed)
        report["best_representation"] = {"label": rep.label,
                                         "terms": len(rep.terms), "cost": cost}
        if args.oracle == "thm64":
            report["oracle"] = thm64_oracle(U, E, F).to_json()
    else:
        raise UsageError(f"unknown quantization {quant!r}")
    report["lower"] = nb.lower
    report["upper"] = nb.upper
    _emit(report, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suites


def _rand_vector(rng, p, atoms) -> LpVector:
    return LpVector(COUNTING, p, {int(a): v for a, v in
                                  zip(atoms, rng.standard_normal(len(atoms)))})


_PS = [1.0, 1.5, 2.0, 3.0, INF]


def suite_diamond_metric(trials: int, seed: int) -> dict:
    def one(t):
        rng = np.random.default_rng((seed, t))
        p = _PS[t % len(_PS)]
        xi = _rand_vector(rng, p, rng.choice(10, size=3, replace=False))
        eta = _rand_vector(rng, p, rng.choice(10, size=3, replace=False))
        got = diamond_base(xi, eta).norm()
        want = xi.norm() * eta.norm()
        return abs(got - want) / max(1.0, want)
    errs = _run_trials(one, trials)
    return {"suite": "diamond-metric", "trials": trials, "seed": seed,
            "max_rel_err": max(errs, default=0.0),
            "passed": all(e <= 1e-12 for e in errs)}


def suite_contractive_module(trials: int, seed: int) -> dict:
    qs = [1.0, 2.0, 3.0]
    violations = []

    def one(t):
        rng = np.random.default_rng((seed, t))
        p = _PS[t % len(_PS)]
        quant = MIN if t % 2 == 0 else MAX
        E = lq_space(2, qs[t % len(qs)])
        window = (0, 1, 2, 3)
        a = LpOperator(COUNTING, p, window, window, rng.standard_normal((4, 4)))
        u = AmplifiedElement(COUNTING, p, E,
                             {i: rng.standard_normal(2) for i in range(4)})
        lhs = amp_norm(module_action(a, u), quant).lower
        rhs = a.norm_bracket().upper * amp_norm(u, quant).upper
        return (t, quant, lhs, rhs)
    for t, quant, lhs, rhs in _run_trials(one, trials):
        if lhs > rhs + 1e-9:
            violations.append({"trial": t, "quant": quant,
                               "lower_image": lhs, "bound": rhs})
    return {"suite": "contractive-module", "trials": trials, "seed": seed,
            "violations": violations, "passed": not violations}


def suite_functional_norm(trials: int, seed: int) -> dict:
    worst = 0.0
    worst_prod = 0.0

    def one(t):
        rng = np.random.default_rng((seed, t))
        q = [1.0, 2.0, 4.0][t % 3]
        E = lq_space(3, q)
        F = lq_space(3, [2.0, 4.0, 1.0][t % 3])
        f = rng.standard_normal(3)
        g = rng.standard_normal(3)
        nb = lbounded_norm_linear(f, E)
        pf = product_functional_lbounded_norm(f, E, g, F)
        want = E.dual_norm(f).upper * F.dual_norm(g).upper
        return nb.width, abs(pf.upper - want) / max(1.0, want)
    for w, dp in _run_trials(one, trials):
        worst = max(worst, w)
        worst_prod = max(worst_prod, dp)
    return {"suite": "functional-norm", "trials": trials, "seed": seed,
            "max_bracket_width": worst, "max_product_err": worst_prod,
            "passed": worst <= 1e-9 and worst_prod <= 1e-9}


def suite_thm47(trials: int, seed: int) -> dict:
    overlap_fail = []
    worst_hilbert = 0.0

    def one(t):
        rng = np.random.default_rng((seed, t))
        p = [2.0, 3.0][t % 2]
        hilbert = (t % 4 < 2)
        E = lq_space(2, 2) if hilbert else lq_space(2, 1)
        F = lq_space(2, 2) if hilbert else lq_space(2, [2.0, 3.0][t % 2])
        block = rng.standard_normal((E.dim, F.dim))
        U = AmplifiedElement(COUNTING, p, lq_space(E.dim * F.dim, 2),
                             {int(rng.integers(0, 6)): block.reshape(-1)})
        g = general_norm_bracket(U, E, F, quant_e=MAX, quant_f=MIN, seed=seed)
        ml = maxleft_norm(U, E, F, quant_f=MIN, seed=seed)
        rel = 0.0
        if hilbert and p == 2.0:
            nuc = float(np.linalg.svd(block, compute_uv=False).sum())
            rel = max(abs(g.lower - nuc), abs(g.upper - nuc)) / max(1.0, nuc)
        return t, g.overlaps(ml, tol=1e-9), rel
    for t, ok, rel in _run_trials(one, trials):
        if not ok:
            overlap_fail.append(t)
        worst_hilbert = max(worst_hilbert, rel)
    return {"suite": "thm47", "trials": trials, "seed": seed,
            "overlap_failures": overlap_fail,
            "max_hilbert_rel_err": worst_hilbert,
            "passed": not overlap_fail and worst_hilbert <= 1e-6}


def suite_pconvex(trials: int, seed: int) -> dict:
    per = max(1, trials // 3)
    reports = [pconvexity_check(lq_space(3, q), q, quant=MIN, trials=per,
                                seed=seed + i)
               for i, q in enumerate([1.5, 2.0, 3.0])]
    violations = [v for r in reports for v in r["violations"]]
    return {"suite": "pconvex", "trials": 3 * per, "seed": seed,
            "violations": violations, "passed": not violations}


def suite_pconvex_counterexample(trials: int, seed: int) -> dict:
    rep = l1_max_counterexample()
    found = rep["violation_found"] and rep["gap"] >= 0.58
    return {"suite": "pconvex-counterexample", "seed": seed,
            "witness": rep, "passed": found}


def _random_step_instance(rng, p: float) -> StepFormInstance:
    q = p / (p - 1.0)
    dE = int(rng.integers(2, 5))
    dF = int(rng.integers(2, 5))
    E = lq_space(dE, q, 0.5 + rng.random(dE))
    F = lq_space(dF, q, 0.5 + rng.random(dF))

    def blocks(dim):
        cut = int(rng.integers(1, dim))
        return (tuple(range(cut)), tuple(range(cut, dim)))
    yb, zb = blocks(dE), blocks(dF)
    xi = {}
    for k in range(len(yb)):
        for l in range(len(zb)):
            if rng.random() < 0.8:
                sup = rng.choice(6, size=2, replace=False)
                xi[(k, l)] = LpVector(COUNTING, p,
                                      {int(a): float(rng.random() + 0.1)
                                       for a in sup})
    if not xi:
        xi[(0, 0)] = LpVector(COUNTING, p, {0: 1.0})
    return StepFormInstance(p, E, F, yb, zb, xi)


def suite_thm64(trials: int, seed: int) -> dict:
    failures = []
    worst = 0.0

    def one(t):
        rng = np.random.default_rng((seed, t))
        p = [1.5, 2.0, 3.0][t % 3]
        inst = _random_step_instance(rng, p)
        U = inst.element()
        orc = thm64_oracle(U, inst.E, inst.F)
        up, _ = pconvex_norm_upper(U, inst.E, inst.F)
        lo = pconvex_norm_lower(U, inst.E, inst.F)
        rel = (up - orc.lower) / max(orc.lower, 1e-30)
        ok = rel <= 1e-6 and lo >= orc.lower - 1e-9
        return t, ok, rel
    for t, ok, rel in _run_trials(one, trials):
        worst = max(worst, rel)
        if not ok:
            failures.append(t)
    return {"suite": "thm64", "trials": trials, "seed": seed,
            "max_rel_gap": worst, "failures": failures,
            "passed": not failures}


def suite_triangle(trials: int, seed: int) -> dict:
    worst = -INF
    failures = []

    def one(t):
        rng = np.random.default_rng((seed, t))
        p = [1.5, 2.0, 3.0][t % 3]
        E = lq_space(2, 2)
        F = lq_space(2, 2)

        def rand_elt(atoms):
            u = AmplifiedElement(COUNTING, p, E,
                                 {a: rng.standard_normal(2) for a in atoms})
            v = AmplifiedElement(COUNTING, p, F,
                                 {a: rng.standard_normal(2) for a in atoms})
            return diamond_amp(u, v)
        U, V = rand_elt([0, 1]), rand_elt([2, 3])
        rU = canonical_prepresentation(canonical_representation(U, E, F))
        rV = canonical_prepresentation(canonical_representation(V, E, F))
        merged = merge_prepresentations(rU, rV)
        if not merged.verify(U + V):
            return t, INF
        return t, merged.cost() - (rU.cost() + rV.cost())
    for t, excess in _run_trials(one, trials):
        worst = max(worst, excess)
        if excess > 1e-9:
            failures.append(t)
    return {"suite": "triangle", "trials": trials, "seed": seed,
            "max_excess": worst, "failures": failures, "passed": not failures}


def suite_kron(trials: int, seed: int) -> dict:
    failures = []

    def one(t):
        rng = np.random.default_rng((seed, t))
        p = [1.0, 2.0, INF][t % 3]
        n = int(rng.integers(2, 4))
        A = LpOperator(COUNTING, p, tuple(range(n)), tuple(range(n)),
                       rng.standard_normal((n, n)))
        B = LpOperator(COUNTING, p, tuple(range(n)), tuple(range(n)),
                       rng.standard_normal((n, n)))
        rep = kron_norm_check(A, B)
        ok = rep["inequality_holds"] and rep.get("equality_holds", True)
        return t, ok
    for t, ok in _run_trials(one, trials):
        if not ok:
            failures.append(t)
    return {"suite": "kron", "trials": trials, "seed": seed,
            "failures": failures, "passed": not failures}


SUITES = {
    "diamond-metric": (suite_diamond_metric, 500),
    "contractive-module": (suite_contractive_module, 200),
    "functional-norm": (suite_functional_norm, 50),
    "thm47": (suite_thm47, 50),
    "pconvex": (suite_pconvex, 300),
    "pconvex-counterexample": (suite_pconvex_counterexample, 1),
    "thm64": (suite_thm64, 30),
    "triangle": (suite_triangle, 100),
    "kron": (suite_kron, 100),
}


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from "
                         + ", ".join(sorted(SUITES)))
    fn, default_trials = SUITES[args.suite]
    trials = args.trials if args.trials is not None else default_trials
    start = time.monotonic()
    report = fn(trials, args.seed)
    elapsed = time.monotonic() - start
    if getattr(args, "format", "json") != "json":
        report = dict(report, wall_time_s=round(elapsed, 3))
    _emit(report, args)
    return EXIT_OK if report["passed"] else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multinorm",
                     description="Certified norm brackets for amplified "
                                 "elements over lp base spaces.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "table", "csv"],
                       default="json")

    pn = sub.add_parser("norm", help="compute a norm bracket for an instance")
    pn.add_argument("--instance", required=True)
    pn.add_argument("--quant", default=MIN,
                    choices=[MIN, MAX, "beta", "gnorm", "pnorm"])
    pn.add_argument("--quant-e", dest="quant_e", default=MIN, choices=[MIN, MAX])
    pn.add_argument("--quant-f", dest="quant_f", default=MIN, choices=[MIN, MAX])
    pn.add_argument("--budget", type=int, default=8)
    pn.add_argument("--restarts", type=int, default=10)
    pn.add_argument("--oracle", default=None, choices=[None, "thm64"])
    common(pn)
    pn.set_defaults(func=cmd_norm)

    for alias, quant in (("gnorm", "gnorm"), ("pnorm", "pnorm")):
        pa = sub.add_parser(alias, help=f"shortcut for norm --quant {quant}")
        pa.add_argument("--instance", required=True)
        pa.add_argument("--quant-e", dest="quant_e", default=MIN, choices=[MIN, MAX])
        pa.add_argument("--quant-f", dest="quant_f", default=MIN, choices=[MIN, MAX])
        pa.add_argument("--budget", type=int, default=8)
        pa.add_argument("--restarts", type=int, default=10)
        pa.add_argument("--p", type=float, default=None)
        pa.add_argument("--oracle", default=None, choices=[None, "thm64"])
        common(pa)
        pa.set_defaults(func=cmd_norm, quant=quant)

    pv = sub.add_parser("verify", help="run a property-verification suite")
    pv.add_argument("--suite", required=True)
    pv.add_argument("--trials", type=int, default=None)
    pv.add_argument("--p", type=float, default=None)
    common(pv)
    pv.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedCombination as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
