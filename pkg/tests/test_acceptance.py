"""Exit criteria, one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines are repeated
in the terminal summary) or as a script: ``python tests/test_acceptance.py``.

Expected values come from independent oracles: brute-force Haar sampling for
SU(2) feasibility and product intervals, direct recomputation for algebraic
identities, and central finite differences for gradients.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from surfacereps import words
from surfacereps.cli import run
from surfacereps.decomp import (Witness, _phi_residual_fn, check_witness, sample_decomposable,
                                solve_phi, witness_from_phi)
from surfacereps.errors import NotARepresentationError
from surfacereps.liecore import (ClassSpec, dagger, haar_sample, random_skew, circular_distance,
                                 eigenphases)
from surfacereps.moduli import (beta_fixed_residual, certify, find_beta_fixed_representation,
                                hausdorff_interval, polytope_sample, representation_residual,
                                su2_oracle_interval, su2_product_interval)
from surfacereps.optim import FinderConfig, gradient_check
from surfacereps.qham import (SurfaceTuple, act, beta_numeric, beta_pullback_residual,
                              beta_residuals, check_axiom_contraction, check_axiom_kernel,
                              max_slot_distance, random_tangent, random_tuple)
from surfacereps.thompson import (ThompsonInstance, solve_thompson, solve_unitary_problem,
                                  thompson_forward)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:      # run as a script
    ACCEPTANCE_LINES = []

pytestmark = pytest.mark.acceptance

ORACLE_DRAWS = 10 ** 6


def record(num, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def su2(*ts):
    return [ClassSpec.su2(t) for t in ts]


def feasible_triples(rng, count, margin=0.05):
    """(t1, t2, t3) with t3 inside the analytic product interval, margin away."""
    out = []
    while len(out) < count:
        t1, t2 = rng.uniform(0.1, math.pi - 0.1, 2)
        lo, hi = su2_product_interval(t1, t2)
        if hi - lo < 4 * margin:
            continue
        out.append((t1, t2, rng.uniform(lo + margin, hi - margin)))
    return out


def infeasible_triples(rng, count, margin=0.1):
    out = []
    while len(out) < count:
        t1, t2 = rng.uniform(0.1, math.pi - 0.1, 2)
        lo, hi = su2_product_interval(t1, t2)
        gaps = [(0.0, lo - margin), (hi + margin, math.pi)]
        gaps = [(a, b) for a, b in gaps if b - a > 0.01]
        if not gaps:
            continue
        a, b = gaps[rng.integers(len(gaps))]
        out.append((t1, t2, rng.uniform(a, b)))
    return out


def oracle_feasible(t1, t2, t3, rng, draws=ORACLE_DRAWS):
    """True when the sampled range of angle(c1 k c2 k^-1) contains t3 (the
    sampled range is attained, so this certifies feasibility), False when t3
    is outside it; the analytic interval must agree in both cases."""
    lo, hi = su2_oracle_interval(t1, t2, draws, rng)
    return lo <= t3 <= hi


# -- 1 ------------------------------------------------------------------------------------

def test_criterion_1_symbolic_suite():
    t0 = time.perf_counter()
    sigs = words.signatures_upto(4)
    failures = [(g, l, r.identity) for g, l in sigs for r in words.verify_all(g, l)
                if not r.passed]
    dt = time.perf_counter() - t0
    ok = not failures and len(sigs) == 24 and dt < 10
    assert record(1, ok, f"{3 * len(sigs)} identities over {len(sigs)} signatures, "
                         f"{len(failures)} failures, {dt:.2f}s (< 10s)")


# -- 2 ------------------------------------------------------------------------------------

def test_criterion_2_numeric_beta():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = {"involution": 0.0, "equivariance": 0.0, "momentum": 0.0, "classes": 0.0}
    for n in (1, 2, 3, 4):
        for g, l in [(0, 1), (0, 3), (1, 0), (2, 0), (1, 2), (2, 2)]:
            for _ in range(100):
                x = random_tuple(n, g, l, rng)
                for k, v in beta_residuals(x, haar_sample(n, rng)).items():
                    worst[k] = max(worst[k], v)
    dt = time.perf_counter() - t0
    ok = (max(worst["involution"], worst["equivariance"], worst["momentum"]) <= 1e-11
          and worst["classes"] <= 1e-8 and dt < 60)
    assert record(2, ok, "beta^2 {involution:.1e}, equivariance {equivariance:.1e}, "
                         "momentum {momentum:.1e} (<= 1e-11), classes {classes:.1e} (<= 1e-8), "
                         .format(**worst) + f"{dt:.1f}s (< 60s)")


# -- 3 ------------------------------------------------------------------------------------

def test_criterion_3_forms():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    groups = {"omega_C": [(0, 1)], "omega_D": [(1, 0)], "fused": [(1, 1), (0, 3), (1, 2), (2, 2)]}
    contraction = {}
    kernel_bad = {}
    for name, sigs in groups.items():
        worst, bad = 0.0, 0
        for g, l in sigs:
            for k in range(50):
                n = 1 + k % 3
                x = random_tuple(n, g, l, rng)
                worst = max(worst, check_axiom_contraction(x, random_skew(n, rng)))
                bad += check_axiom_kernel(x).verdict != "pass"
        contraction[name], kernel_bad[name] = worst, bad
    # points where Ad mu(x) has the eigenvalue -1, so the predicted kernel is non-zero
    nonzero = 0
    for k in range(50):
        n = 2 + k % 2
        ph = rng.uniform(0, 2 * math.pi, n)
        ph[1] = ph[0] + math.pi
        u = haar_sample(n, rng)
        c = u @ np.diag(np.exp(1j * ph)) @ dagger(u)
        for x in (SurfaceTuple.from_slots(0, 1, [c]),
                  SurfaceTuple.from_slots(0, 2, [c, np.eye(n, dtype=complex)])):
            kr = check_axiom_kernel(x)
            kernel_bad["degenerate"] = kernel_bad.get("degenerate", 0) + (kr.verdict != "pass")
            nonzero += kr.predicted > 0
    fd = analytic = 0.0
    sigs = [(g, l) for g in range(3) for l in range(3) if g + l >= 1]
    for k in range(100):
        n = 1 + k % 3
        g, l = sigs[k % len(sigs)]
        x = random_tuple(n, g, l, rng)
        t1, t2 = random_tangent(x, rng), random_tangent(x, rng)
        fd = max(fd, beta_pullback_residual(x, t1, t2, mode="fd"))
        analytic = max(analytic, beta_pullback_residual(x, t1, t2, mode="analytic"))
    dt = time.perf_counter() - t0
    ok = (max(contraction.values()) <= 1e-10 and not any(kernel_bad.values())
          and nonzero == 100 and fd <= 1e-6 and analytic <= 1e-10 and dt < 300)
    assert record(3, ok, f"contraction max {max(contraction.values()):.1e} (<= 1e-10), "
                         f"kernel mismatches {sum(kernel_bad.values())} "
                         f"({nonzero} points with non-zero kernel), "
                         f"pullback fd {fd:.1e} (<= 1e-6), analytic {analytic:.1e} (<= 1e-10), "
                         f"{dt:.1f}s")


# -- 4 ------------------------------------------------------------------------------------

def test_criterion_4_characterization():
    rng = np.random.default_rng(4)
    sigs = [(g, l) for g in range(3) for l in range(3) if g + l >= 1]
    worst_beta = worst_phi = 0.0
    failures = 0
    count = 0
    for n in (1, 2, 3):
        for g, l in sigs:
            for _ in range(100):
                x, wit = sample_decomposable(n, g, l, rng)
                worst_beta = max(worst_beta,
                                 max_slot_distance(beta_numeric(x), act(dagger(wit.chain_start), x)))
                r = solve_phi(x)
                if r is None:
                    failures += 1
                    continue
                worst_phi = max(worst_phi, r.residual)
                failures += not check_witness(x, witness_from_phi(x, r.phi)).passed
                count += 1
    # negative controls
    neg_ok = True
    for _ in range(20):
        x, wit = sample_decomposable(3, 1, 2, rng)
        X = random_skew(3, rng)
        ws = list(wit.ws)
        ws[-1] = ws[-1] @ expm(1e-2 * X / np.linalg.norm(X))
        neg_ok &= not check_witness(x, Witness(wit.vs, tuple(ws), wit.phi)).passed
        try:
            check_witness(random_tuple(3, 1, 2, rng), wit)
            neg_ok = False
        except NotARepresentationError:
            pass
        cs = [haar_sample(2, rng) for _ in range(3)]
        cs.append(dagger(cs[0] @ cs[1] @ cs[2]))
        neg_ok &= solve_phi(SurfaceTuple.from_slots(0, 4, cs)) is None
        a = haar_sample(3, rng)
        neg_ok &= solve_phi(SurfaceTuple.from_slots(1, 0, [a, a])) is None
    ok = worst_beta <= 1e-9 and worst_phi <= 1e-8 and failures == 0 and neg_ok
    assert record(4, ok, f"{count} round trips, beta(x) = v1^-1.x max {worst_beta:.1e} (<= 1e-9), "
                         f"phi residual max {worst_phi:.1e} (<= 1e-8), failures {failures}, "
                         f"negative controls {'ok' if neg_ok else 'FAILED'}")


# -- 5 ------------------------------------------------------------------------------------

def test_criterion_5_existence():
    rng = np.random.default_rng(5)
    worst_cert, worst_time, failures = 0.0, 0.0, 0
    triples = feasible_triples(rng, 50)
    for t in triples:
        assert oracle_feasible(t[0], t[1], t[2], rng), t
        t0 = time.perf_counter()
        x = find_beta_fixed_representation(su2(*t), 0, FinderConfig(seed=int(rng.integers(2 ** 31))))
        dt = time.perf_counter() - t0
        worst_time = max(worst_time, dt)
        if x is None:
            failures += 1
            continue
        worst_cert = max(worst_cert, certify(x).max())
    ok = failures == 0 and worst_cert <= 1e-7 and worst_time < 10
    assert record(5, ok, f"{len(triples)} oracle-certified feasible SU(2) triples, "
                         f"{failures} failures, max certificate {worst_cert:.1e} (<= 1e-7), "
                         f"slowest {worst_time:.2f}s (< 10s)")


# -- 6 ------------------------------------------------------------------------------------

def test_criterion_6_convexity():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = 0.0
    details = []
    for k, pair in enumerate([(math.pi / 2, math.pi / 2), (0.3, 1.2), (2.0, 2.5)]):
        full = polytope_sample(su2(*pair), 10 ** 5, 100 + k, "full").hull()
        beta = polytope_sample(su2(*pair), 10 ** 5, 200 + k, "beta").hull()
        oracle = su2_oracle_interval(*pair, ORACLE_DRAWS, rng)
        d = max(hausdorff_interval(full, beta), hausdorff_interval(full, oracle),
                hausdorff_interval(beta, oracle))
        worst = max(worst, d)
        details.append(f"({pair[0]:.2f},{pair[1]:.2f}) {d:.1e}")
    dt = time.perf_counter() - t0
    ok = worst <= 0.02 and dt < 120
    assert record(6, ok, "Hausdorff distances full/beta/oracle " + ", ".join(details)
                         + f" (<= 0.02), {dt:.1f}s (< 120s)")


# -- 7 ------------------------------------------------------------------------------------

def test_criterion_7_thompson():
    rng = np.random.default_rng(7)
    # (a) forward direction on random valid inputs
    prod_res = spec_res = 0.0
    for k in range(100):
        n, l = 1 + k % 4, 1 + (k // 4) % 4
        As = [haar_sample(n, rng) for _ in range(l - 1)]
        P = np.eye(n, dtype=complex)
        for a in As:
            P = P @ a
        As.append(dagger(P))
        us = thompson_forward(As)
        Q = np.eye(n, dtype=complex)
        for u in us:
            Q = Q @ u
        prod_res = max(prod_res, float(np.linalg.norm(Q - np.eye(n))))
        spec_res = max(spec_res, max(math.sqrt(circular_distance(eigenphases(u),
                                                                 eigenphases(a.T @ a))[0])
                                     for u, a in zip(us, As)))
    ok_a = prod_res <= 1e-12 and spec_res <= 1e-12
    # (b) solver on oracle-feasible and oracle-infeasible SU(2) triples
    cert, fail_b = 0.0, 0
    for t in feasible_triples(rng, 20):
        assert oracle_feasible(*t, rng)
        sol = solve_thompson(ThompsonInstance(2, tuple(su2(*t))))
        if sol is None:
            fail_b += 1
        else:
            cert = max(cert, sol.product, max(sol.spectral))
    for t in infeasible_triples(rng, 5):
        assert not oracle_feasible(*t, rng)
        inst = ThompsonInstance(2, tuple(su2(*t)))
        fail_b += solve_thompson(inst) is not None
        fail_b += solve_unitary_problem(inst) is not None
    ok_b = fail_b == 0 and cert <= 1e-7
    # (c) statements (i) and (ii) together
    disagree, n_true = 0, 0
    for k in range(50):
        if k < 30:
            t1, t2, t3 = rng.uniform(0.1, math.pi - 0.1, 3)
            lo, hi = su2_product_interval(t1, t2)
            if min(abs(t3 - lo), abs(t3 - hi)) < 0.05:
                t3 = lo - 0.1 if lo > 0.2 else hi + 0.1
            inst = ThompsonInstance(2, tuple(su2(t1, t2, t3)))
        else:
            n, l = 2 + k % 2, 3 + k % 2
            cs = [haar_sample(n, rng) for _ in range(l - 1)]
            P = np.eye(n, dtype=complex)
            for c in cs:
                P = P @ c
            cs.append(dagger(P))
            inst = ThompsonInstance(n, tuple(ClassSpec.of(c) for c in cs))
        i_ok = solve_unitary_problem(inst) is not None
        ii = solve_thompson(inst)
        ii_ok = ii is not None and ii.valid
        if ii_ok:
            us = thompson_forward(ii.As)
            Q = np.eye(inst.n, dtype=complex)
            for u in us:
                Q = Q @ u
            ii_ok = np.linalg.norm(Q - np.eye(inst.n)) <= 1e-10
        disagree += i_ok != ii_ok
        n_true += i_ok
    ok_c = disagree == 0
    ok = ok_a and ok_b and ok_c
    assert record(7, ok, f"(a) product {prod_res:.1e}, spectra {spec_res:.1e} (<= 1e-12); "
                         f"(b) max certificate {cert:.1e} (<= 1e-7), {fail_b} inconsistencies; "
                         f"(c) {disagree} disagreements on 50 instances ({n_true} feasible)")


# -- 8 ------------------------------------------------------------------------------------

def test_criterion_8_gradients():
    rng = np.random.default_rng(8)
    worst = {}
    rep_sigs = [(su2(0.4, 1.1, 2.0), 0, 2), ([ClassSpec((0.2, 1.0, 2.5))] * 2, 1, 3), ([], 2, 2)]
    fix_sigs = [(su2(0.4, 1.1, 2.0), 0, 2), ([ClassSpec((0.2, 1.0, 2.5))] * 2, 1, 3), ([], 2, 2)]
    for k in range(20):
        specs, g, n = rep_sigs[k % 3]
        p = [haar_sample(n, rng) for _ in range(2 * g + len(specs))]
        worst["representation"] = max(worst.get("representation", 0.0),
                                      gradient_check(representation_residual(specs, g), p))
        specs, g, n = fix_sigs[k % 3]
        p = [haar_sample(n, rng) for _ in range(g + len(specs))]
        worst["beta_fixed"] = max(worst.get("beta_fixed", 0.0),
                                  gradient_check(beta_fixed_residual(specs, g), p))
        n = 2 + k % 2
        x, _ = sample_decomposable(n, 1, 1, rng)
        worst["phi"] = max(worst.get("phi", 0.0),
                           gradient_check(_phi_residual_fn(x, beta_numeric(x)), [haar_sample(n, rng)]))
    ok = max(worst.values()) <= 1e-6
    assert record(8, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
                         + " relative error (<= 1e-6), 20 points each")


# -- 9 ------------------------------------------------------------------------------------

def _payload(argv):
    rep, status, _ = run(argv)
    d = rep.to_dict()
    d.pop("timing")
    return json.dumps(d, sort_keys=True), status


def test_criterion_9_determinism(tmp_path):
    cls = tmp_path / "cls.json"
    cls.write_text(json.dumps([{"group": "SU", "phases": [t, -t]} for t in (0.5, 0.9, 1.2)]))
    pair = tmp_path / "pair.json"
    pair.write_text(json.dumps([{"group": "SU", "phases": [t, -t]} for t in (0.3, 1.2)]))
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({"n": 2, "lambdas": [[0.5, -0.5], [0.9, -0.9], [1.2, -1.2]]}))
    samp, sol, fnd, cloud = (tmp_path / f for f in ("s.json", "sol.json", "f.json", "c.csv"))
    commands = [
        ["verify", "symbolic", "--all-upto", "2"],
        ["verify", "numeric", "--n", "2", "--g", "1", "--l", "1", "--samples", "20", "--seed", "7"],
        ["forms", "check", "--which", "kernel", "--n", "2", "--g", "1", "--l", "1", "--samples", "5", "--seed", "1"],
        ["forms", "check", "--which", "contraction", "--n", "3", "--g", "1", "--l", "2", "--samples", "5", "--seed", "1"],
        ["forms", "check", "--which", "beta-reversal", "--n", "2", "--g", "1", "--l", "1", "--samples", "5", "--seed", "1"],
        ["sample", "decomposable", "--n", "3", "--g", "1", "--l", "2", "--seed", "3", "-o", str(samp)],
        ["sample", "decomposable", "--n", "2", "--g", "0", "--l", "3", "--seed", "3", "--classes", str(cls)],
        ["find", "--classes", str(cls), "--seed", "1", "-o", str(fnd)],
        ["find", "--classes", str(cls), "--beta-fixed", "--seed", "1"],
        ["analyze", "isotropy", "--input", str(fnd)],
        ["polytope", "sample", "--classes", str(pair), "--samples", "5000", "--source", "full", "--seed", "2"],
        ["polytope", "sample", "--classes", str(pair), "--samples", "5000", "--source", "beta", "--seed", "2",
         "-o", str(cloud)],
        ["thompson", "solve", "--spectra", str(inst), "--seed", "0", "-o", str(sol)],
        ["thompson", "check", "--solution", str(sol)],
    ]
    mismatched = []
    for argv in commands:
        first = _payload(argv)
        outs = [p.read_bytes() for p in (samp, sol, fnd, cloud) if p.exists()]
        second = _payload(argv)
        outs2 = [p.read_bytes() for p in (samp, sol, fnd, cloud) if p.exists()]
        if first != second or outs != outs2:
            mismatched.append(" ".join(argv[:2]))
    # commands that consume the files written above
    tup = tmp_path / "t.json"
    tup.write_text(json.dumps(json.loads(samp.read_text())["tuple"]))
    As = tmp_path / "As.json"
    As.write_text(json.dumps({"As": json.loads(sol.read_text())["As"]}))
    for argv in (["decompose", "--input", str(tup)], ["thompson", "forward", "--input", str(As)]):
        if _payload(argv) != _payload(argv):
            mismatched.append(" ".join(argv[:1]))
    total = len(commands) + 2
    ok = not mismatched
    assert record(9, ok, f"{total} CLI invocations re-run with identical payloads"
                         + (f"; mismatched: {mismatched}" if mismatched else ""))


if __name__ == "__main__":
    import sys
    import tempfile
    from pathlib import Path

    status = 0
    for name, fn in sorted((k, v) for k, v in dict(globals()).items() if k.startswith("test_criterion_")):
        try:
            if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            status = 1
    sys.exit(status)
