"""Command-line entry point.

Every command prints a JSON report: the command echo, per-check verdicts
with residuals, the artifact and schema versions, digests of input files and
a separate timing block. Apart from timing, a report depends only on the
arguments, the tolerance table and the seed.
"""

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from . import io as sio
from .config import load_tolerances
from .errors import IndeterminateError, NoSolutionFound, SurfaceRepsError

VERDICTS = ("pass", "fail", "indeterminate", "none-found")


class Report:
    def __init__(self, args, tol):
        self.command = args.command_path
        self.args = {k: v for k, v in sorted(vars(args).items())
                     if k not in ("func", "command_path", "report") and not callable(v)}
        self.tol = tol
        self.checks = []
        self.payload = {}
        self.digests = {}
        self._t0 = time.perf_counter()

    def check(self, name, verdict, **data):
        assert verdict in VERDICTS
        self.checks.append({"name": name, "verdict": verdict, **data})

    def bound(self, name, value, tol, **data):
        self.check(name, "pass" if value <= tol else "fail", residual=value, tol=tol, **data)

    def digest(self, path):
        self.digests[str(path)] = sio.file_digest(path)

    def exit_status(self, allow_none=False):
        ok = {"pass", "none-found"} if allow_none else {"pass"}
        return 0 if all(c["verdict"] in ok for c in self.checks) else 1

    def to_dict(self):
        return {"command": self.command, "args": self.args, "version": __version__,
                "schema_version": sio.SCHEMA_VERSION, "tolerances": self.tol.to_dict(),
                "input_digests": self.digests, "checks": self.checks,
                "payload": self.payload,
                "timing": {"seconds": round(time.perf_counter() - self._t0, 6)}}


def _residuals(wr):
    return {k: v for k, v in wr.to_dict().items() if k != "verdict"}


def _rng(seed):
    return np.random.default_rng(seed)


def _finder_cfg(args):
    from .optim import FinderConfig
    return FinderConfig(max_iters=args.max_iters, restarts=args.restarts, seed=args.seed,
                        tol_objective=args.tol_objective)


# -- verify --------------------------------------------------------------------------------

def cmd_verify_symbolic(args, rep):
    from . import words

    if args.g is not None or args.l is not None:
        sigs = [(args.g or 0, args.l or 0)]
    else:
        sigs = words.signatures_upto(args.all_upto)
    for g, l in sigs:
        for pr in words.verify_all(g, l):
            rep.check(f"{pr.identity}[g={g},l={l}]", "pass" if pr.passed else "fail",
                      status=pr.status)
    rep.payload["signatures"] = [list(s) for s in sigs]
    rep.payload["identities"] = len(rep.checks)


def cmd_verify_numeric(args, rep):
    from .liecore import haar_sample
    from .qham import beta_residuals, random_tuple

    rng = _rng(args.seed)
    worst = {"involution": 0.0, "equivariance": 0.0, "momentum": 0.0, "classes": 0.0}
    for _ in range(args.samples):
        x = random_tuple(args.n, args.g, args.l, rng)
        u = haar_sample(args.n, rng)
        for k, v in beta_residuals(x, u).items():
            worst[k] = max(worst[k], v)
    t = rep.tol
    beta_tol = args.tol if args.tol is not None else t.beta
    rep.bound("beta_involution", worst["involution"], beta_tol)
    rep.bound("beta_equivariance", worst["equivariance"], beta_tol)
    rep.bound("momentum_compatibility", worst["momentum"], beta_tol)
    rep.bound("class_preservation", worst["classes"], t.class_membership)
    rep.payload = {"samples": args.samples, "seed": args.seed, "n": args.n, "g": args.g,
                   "l": args.l, "max_residuals": worst}


def cmd_forms_check(args, rep):
    from .liecore import random_skew
    from .qham import (beta_pullback_residual, check_axiom_contraction, check_axiom_kernel,
                       random_tangent, random_tuple)

    rng = _rng(args.seed)
    t = rep.tol
    if args.which == "kernel":
        counts = {"pass": 0, "fail": 0, "indeterminate": 0}
        worst_gap = math.inf
        for _ in range(args.samples):
            kr = check_axiom_kernel(random_tuple(args.n, args.g, args.l, rng), t.nullity, t.gap)
            counts[kr.verdict] += 1
            worst_gap = min(worst_gap, kr.gap_ratio)
        verdict = "fail" if counts["fail"] else ("indeterminate" if counts["indeterminate"] else "pass")
        rep.check("axiom_kernel", verdict, counts=counts)
        rep.payload = {"counts": counts, "min_gap_ratio": None if math.isinf(worst_gap) else worst_gap}
    elif args.which == "contraction":
        worst = 0.0
        for _ in range(args.samples):
            x = random_tuple(args.n, args.g, args.l, rng)
            worst = max(worst, check_axiom_contraction(x, random_skew(args.n, rng)))
        rep.bound("axiom_contraction", worst, args.tol if args.tol is not None else t.form)
        rep.payload = {"max_residual": worst}
    else:
        worst = 0.0
        for _ in range(args.samples):
            x = random_tuple(args.n, args.g, args.l, rng)
            worst = max(worst, beta_pullback_residual(x, random_tangent(x, rng),
                                                      random_tangent(x, rng), mode=args.mode))
        default = t.fd_form if args.mode == "fd" else t.form
        rep.bound("beta_reversal", worst, args.tol if args.tol is not None else default,
                  mode=args.mode)
        rep.payload = {"max_residual": worst, "mode": args.mode}
    rep.payload.update({"samples": args.samples, "seed": args.seed, "n": args.n,
                        "g": args.g, "l": args.l})


# -- decomposability ----------------------------------------------------------------------------

def cmd_decompose(args, rep):
    from .decomp import check_witness, solve_phi, witness_from_phi

    rep.digest(args.input)
    x = sio.tuple_from_json(sio.load_json(args.input))
    tol = args.tol if args.tol is not None else rep.tol.phi
    res = solve_phi(x, tol=tol)
    if res is None:
        rep.check("solve_phi", "none-found")
        return
    rep.bound("solve_phi", res.residual, tol, generic=res.generic)
    wit = witness_from_phi(x, res.phi, max(tol, rep.tol.representation))
    wr = check_witness(x, wit, rep.tol.representation)
    rep.check("check_witness", "pass" if wr.passed else "fail", residuals=_residuals(wr))
    rep.payload = {"phi": sio.matrix_to_json(res.phi), "witness": sio.witness_to_json(wit),
                   "symmetry": res.symmetry}


def cmd_sample_decomposable(args, rep):
    from .decomp import check_witness, sample_decomposable

    specs = None
    if args.classes:
        rep.digest(args.classes)
        specs = sio.specs_from_json(sio.load_json(args.classes))
    try:
        x, wit = sample_decomposable(args.n, args.g, args.l, _rng(args.seed), specs)
    except NoSolutionFound:
        rep.check("sample_decomposable", "none-found")
        return
    wr = check_witness(x, wit, rep.tol.representation)
    rep.check("check_witness", "pass" if wr.passed else "fail", residuals=_residuals(wr))
    out = {"tuple": sio.tuple_to_json(x), "witness": sio.witness_to_json(wit)}
    if args.output:
        sio.dump_json(out, args.output)
    else:
        rep.payload["sample"] = out
    rep.payload["seed"] = args.seed


# -- moduli ---------------------------------------------------------------------------------------------

def cmd_find(args, rep):
    from .moduli import certify, find_beta_fixed_representation, find_representation

    rep.digest(args.classes)
    specs = sio.specs_from_json(sio.load_json(args.classes))
    cfg = _finder_cfg(args)
    finder = find_beta_fixed_representation if args.beta_fixed else find_representation
    x = finder(specs, args.g, cfg, n=args.n)
    if x is None:
        rep.check("find", "none-found")
        return
    cert = certify(x)
    tol = rep.tol.certificate
    rep.bound("momentum", cert.momentum, tol)
    rep.bound("classes", max(cert.classes, default=0.0), tol)
    if args.beta_fixed:
        rep.bound("beta_fixed", cert.beta, tol)
    if args.output:
        sio.dump_json(sio.tuple_to_json(x), args.output)
    else:
        rep.payload["tuple"] = sio.tuple_to_json(x)
    rep.payload["certificates"] = cert.to_dict()


def cmd_analyze_isotropy(args, rep):
    from .moduli import isotropy_dimension

    rep.digest(args.input)
    x = sio.tuple_from_json(sio.load_json(args.input))
    try:
        dim = isotropy_dimension(x, rep.tol.nullity, rep.tol.gap)
    except IndeterminateError:
        rep.check("isotropy", "indeterminate")
        return
    centre = 0 if x.group == "SU" else 1
    rep.check("isotropy", "pass", dimension=dim)
    rep.payload = {"dimension": dim, "irreducible": dim == centre}


def cmd_polytope_sample(args, rep):
    from .moduli import polytope_sample

    if args.group != "su2":
        raise SurfaceRepsError("only --group su2 is supported")
    rep.digest(args.classes)
    specs = sio.specs_from_json(sio.load_json(args.classes))
    ps = polytope_sample(specs, args.samples, args.seed, args.source)
    lo, hi = ps.hull() if len(ps.angles) else (None, None)
    rep.check("polytope_sample", "pass" if len(ps.angles) == args.samples else "fail",
              count=len(ps.angles))
    rep.payload = {"hull": [lo, hi], "metadata": ps.metadata}
    if args.output:
        with open(args.output, "w", newline="") as fh:
            for k, v in ps.metadata.items():
                fh.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
            w = csv.writer(fh)
            w.writerow(["angle"])
            for a in ps.angles:
                w.writerow([repr(float(a))])


# -- thompson ---------------------------------------------------------------------------------------

def _report_solution(rep, sol):
    tol = rep.tol.certificate
    rep.bound("product", sol.product, tol)
    rep.bound("spectra", max(sol.spectral), tol)


def cmd_thompson_solve(args, rep):
    from .thompson import solve_thompson

    rep.digest(args.spectra)
    inst = sio.instance_from_json(sio.load_json(args.spectra))
    sol = solve_thompson(inst, _finder_cfg(args), rep.tol.certificate)
    if sol is None:
        rep.check("solve_thompson", "none-found")
        return
    _report_solution(rep, sol)
    out = {**sio.instance_to_json(inst), "As": [sio.matrix_to_json(a) for a in sol.As]}
    if args.output:
        sio.dump_json(out, args.output)
    else:
        rep.payload["solution"] = out
    rep.payload["certificates"] = sol.to_dict()


def cmd_thompson_check(args, rep):
    from .thompson import certify

    rep.digest(args.solution)
    obj = sio.load_json(args.solution)
    inst = sio.instance_from_json(obj)
    As = sio.matrices_from_json(obj, "As")
    sol = certify(As, inst, rep.tol.certificate)
    _report_solution(rep, sol)
    rep.payload["certificates"] = sol.to_dict()


def cmd_thompson_forward(args, rep):
    from .liecore import circular_distance, eigenphases
    from .thompson import thompson_forward

    rep.digest(args.input)
    As = sio.matrices_from_json(sio.load_json(args.input), "As")
    us = thompson_forward(As, rep.tol.representation)
    n = As[0].shape[0]
    prod = np.eye(n, dtype=complex)
    for u in us:
        prod = prod @ u
    tol = rep.tol.identity * max(1, len(us))
    rep.bound("product", float(np.linalg.norm(prod - np.eye(n))), tol)
    spec = max(math.sqrt(circular_distance(eigenphases(u), eigenphases(a.T @ a))[0])
               for u, a in zip(us, As))
    rep.bound("spectra", spec, rep.tol.factorization)
    rep.payload["us"] = [sio.matrix_to_json(u) for u in us]


# -- parser ---------------------------------------------------------------------------------------------

def _add_sig(p, n=True):
    if n:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--l", type=int, required=True)


def _add_finder(p):
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--tol-objective", type=float, default=1e-12)


def build_parser():
    ap = argparse.ArgumentParser(prog="surfacereps",
                                 description="Surface group representations, the involution beta "
                                             "and decomposable representations.")
    ap.add_argument("--version", action="version",
                    version=f"surfacereps {__version__} (schema {sio.SCHEMA_VERSION})")
    ap.add_argument("--config", help="tolerance table (JSON); default $SURFACEREPS_CONFIG")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override one tolerance")
    ap.add_argument("--report", help="also write the report to this file")
    ap.add_argument("--allow-none", action="store_true",
                    help="exit 0 when a finder legitimately finds nothing")
    sub = ap.add_subparsers(dest="command", required=True)

    def leaf(parent, name, func, path):
        p = parent.add_parser(name)
        p.set_defaults(func=func, command_path=path)
        return p

    verify = sub.add_parser("verify").add_subparsers(dest="sub", required=True)
    p = leaf(verify, "symbolic", cmd_verify_symbolic, "verify symbolic")
    p.add_argument("--all-upto", type=int, default=4)
    p.add_argument("--g", type=int)
    p.add_argument("--l", type=int)
    p = leaf(verify, "numeric", cmd_verify_numeric, "verify numeric")
    _add_sig(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float)

    forms = sub.add_parser("forms").add_subparsers(dest="sub", required=True)
    p = leaf(forms, "check", cmd_forms_check, "forms check")
    p.add_argument("--which", choices=["kernel", "contraction", "beta-reversal"], required=True)
    _add_sig(p)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=["fd", "analytic"], default="fd")
    p.add_argument("--tol", type=float)

    p = leaf(sub, "decompose", cmd_decompose, "decompose")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float)

    sample = sub.add_parser("sample").add_subparsers(dest="sub", required=True)
    p = leaf(sample, "decomposable", cmd_sample_decomposable, "sample decomposable")
    _add_sig(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--classes")
    p.add_argument("-o", "--output")

    p = leaf(sub, "find", cmd_find, "find")
    p.add_argument("--classes", required=True)
    p.add_argument("--g", type=int, default=0)
    p.add_argument("--n", type=int, help="dimension, needed only when there are no classes")
    p.add_argument("--beta-fixed", action="store_true")
    _add_finder(p)
    p.add_argument("-o", "--output")

    analyze = sub.add_parser("analyze").add_subparsers(dest="sub", required=True)
    p = leaf(analyze, "isotropy", cmd_analyze_isotropy, "analyze isotropy")
    p.add_argument("--input", required=True)

    poly = sub.add_parser("polytope").add_subparsers(dest="sub", required=True)
    p = leaf(poly, "sample", cmd_polytope_sample, "polytope sample")
    p.add_argument("--group", default="su2")
    p.add_argument("--classes", required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--source", choices=["full", "beta"], default="full")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output")

    th = sub.add_parser("thompson").add_subparsers(dest="sub", required=True)
    p = leaf(th, "solve", cmd_thompson_solve, "thompson solve")
    p.add_argument("--spectra", required=True)
    _add_finder(p)
    p.add_argument("-o", "--output")
    p = leaf(th, "check", cmd_thompson_check, "thompson check")
    p.add_argument("--solution", required=True)
    p = leaf(th, "forward", cmd_thompson_forward, "thompson forward")
    p.add_argument("--input", required=True)
    return ap


def _tolerances(args):
    tol = load_tolerances(args.config)
    kw = {}
    for item in args.set:
        key, _, val = item.partition("=")
        kw[key.strip()] = float(val)
    return tol.override(**kw) if kw else tol


def run(argv=None):
    """Parse, dispatch, and return (report dict, exit status)."""
    args = build_parser().parse_args(argv)
    rep = Report(args, _tolerances(args))
    args.func(args, rep)
    return rep, rep.exit_status(args.allow_none), args


def main(argv=None):
    try:
        rep, status, args = run(argv)
    except (SurfaceRepsError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(rep.to_dict(), indent=2, sort_keys=True)
    print(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
