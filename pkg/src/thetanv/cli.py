"""Command-line drivers. Every subcommand prints one JSON envelope on stdout

    {command, parameters, status, payload, elapsed, tool_version}

and a one-line summary on stderr. Exit status: 0 pass, 1 verification
failure, 2 usage or input error. ``elapsed`` stays null unless --timing is
given, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .gauss import GaussSumSpec, gauss_closed, gauss_direct, gauss_verify_range
from .halfint import HalfIntForm, HypothesisError, check_sieve_postconditions, run_sieve
from .jacobi import (
    JacobiFormCoeffs,
    V_ell,
    build_witness,
    check_primitive_nonvanishing,
    construct_phi_10_1,
    numeric_verify_hrel,
    numeric_verify_transform,
    theta_decompose,
)
from .theta_matrix import (
    EpsilonContext,
    epsilon_matrix,
    scan_theorem1,
    square_class,
    square_class_size,
    verify_epsilon_identity,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad user input: reported with exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a complex number like 2j or 0.3+0.2j, got {text!r}")


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}")


def _load_form(args) -> JacobiFormCoeffs:
    if getattr(args, "input", None):
        data = _load_json(args.input)
        data = data.get("payload", data)
        data = data.get("form", data)
        try:
            return JacobiFormCoeffs.from_json(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed coefficient table: {exc}")
    return construct_phi_10_1(args.prec)


# --------------------------------------------------------------------------
# handlers: each returns (status, payload, summary)


def cmd_gauss_eval(args):
    s = GaussSumSpec(args.a, args.b, args.c)
    direct, closed = gauss_direct(s), gauss_closed(s)
    value = direct.embed()
    equal = direct == closed
    payload = {
        "sum": s.to_json(),
        "direct": direct.to_json(),
        "closed": closed.to_json(),
        "equal": equal,
        "numeric": [round(value.real, 12) + 0.0, round(value.imag, 12) + 0.0],
    }
    return ("pass" if equal else "fail"), payload, f"G({s.a},{s.b},{s.c}) = {value:.6g}; closed form {'agrees' if equal else 'DISAGREES'}"


def cmd_gauss_verify(args):
    rep = gauss_verify_range(args.cmax, jobs=args.jobs)
    low = {k: v for k, v in rep["case_counts"].items() if v < args.min_case_count}
    rep["min_case_count"] = args.min_case_count
    rep["under_exercised_cases"] = sorted(low)
    ok = not rep["failures"] and not low
    return ("pass" if ok else "fail"), rep, f"{rep['checked']} triples, {len(rep['failures'])} failures, cases {rep['case_counts']}"


def cmd_epsilon_matrix(args):
    ctx = EpsilonContext.make(args.N, args.m1, args.m2, args.l)
    mat = epsilon_matrix(ctx, closed=args.closed)
    check = verify_epsilon_identity(ctx)
    ok = not check["mismatches"] and not check["lemma_failures"]
    payload = {"ctx": ctx.to_json(), "closed_form": args.closed, "matrix": mat.to_json(), "check": check}
    return ("pass" if ok else "fail"), payload, f"{mat.rows}x{mat.cols} matrix; direct and closed forms {'agree' if ok else 'DISAGREE'}"


def cmd_square_classes(args):
    m = args.m1 * args.m2
    nus = [args.nu0] if args.nu0 is not None else range(2 * m)
    classes, bad, seen = [], [], set()
    for nu in nus:
        cls = square_class(args.m1, args.m2, nu)
        if args.nu0 is None and cls.members in seen:
            continue
        seen.add(cls.members)
        expected = square_class_size(m, nu)
        classes.append({"nu0": nu % (2 * m), "members": list(cls.members), "expected_size": expected})
        if len(cls.members) != expected:
            bad.append(nu)
    payload = {"m1": args.m1, "m2": args.m2, "classes": classes, "size_failures": bad}
    return ("fail" if bad else "pass"), payload, f"{len(classes)} classes for m = {m}; {len(bad)} size mismatches"


def cmd_rank_scan(args):
    rep = scan_theorem1(args.max_index, args.levels, include_even=args.include_even, crt=not args.no_crt, jobs=args.jobs)
    ok = not (rep["failures"] or rep["crt_failures"] or rep["partition_failures"])
    summary = f"{rep['cells']} cells, {rep['passes']} full rank, {len(rep['failures'])} failures, {rep['crt_checks']} CRT checks"
    return ("pass" if ok else "fail"), rep, summary


def cmd_jacobi_construct(args):
    if args.form != "phi10_1":
        raise InputError(f"unknown form {args.form!r}")
    phi = construct_phi_10_1(args.prec)
    return "pass", {"form": phi.to_json()}, f"phi_10,1 with {len(phi.reduced())} reduced coefficients up to D = {args.prec}"


def cmd_jacobi_vell(args):
    phi = _load_form(args)
    out = V_ell(phi, args.ell)
    return "pass", {"form": out.to_json()}, f"V_{args.ell}: index {phi.index} -> {out.index}"


def cmd_jacobi_decompose(args):
    phi = _load_form(args)
    h = theta_decompose(phi)
    return "pass", {"index": h.index, "nonzero": h.nonzero(), "components": h.to_json()["components"]}, f"{len(h.nonzero())} of {2 * h.index} components nonzero"


def cmd_jacobi_check(args):
    phi = _load_form(args)
    if args.ell:
        for ell in args.ell:
            phi = V_ell(phi, ell)
    split = tuple(args.split) if args.split else None
    if split is not None and len(split) != 2:
        raise InputError("--split expects m1,m2")
    rep = check_primitive_nonvanishing(phi, split)
    return ("pass" if rep["consistent"] else "fail"), rep, f"index {rep['index']}: primitive nonzero components {rep['primitive_nonzero']}"


def cmd_jacobi_transform(args):
    theta = numeric_verify_transform(args.m, args.N, [args.tau], [args.z], tol=args.tol)
    payload = {"theta": theta}
    ok = theta["max_residual"] < args.residual and theta["tail_ok"]
    if args.N == 1:
        # grow the coefficient table until the reported tail meets the tolerance
        prec = args.prec
        while True:
            phi = construct_phi_10_1(prec)
            if args.m > 1:
                phi = V_ell(phi, args.m)
            hrel = numeric_verify_hrel(phi, 1, [args.tau], tol=args.tol)
            if hrel["tail_ok"] or prec >= 8 * args.prec:
                break
            prec *= 2
        hrel["prec"] = prec
        payload["components"] = hrel
        ok = ok and hrel["max_residual"] < args.residual and hrel["tail_ok"]
    payload["residual_threshold"] = args.residual
    return ("pass" if ok else "fail"), payload, f"theta residual {theta['max_residual']:.2e}"


def cmd_halfint_sieve(args):
    data = _load_json(args.input)
    try:
        if args.L is not None:
            data = dict(data, L=args.L)
        f = HalfIntForm.from_json(data, bound=args.bound)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed form: {exc}")
    L = args.L if args.L is not None else f.level // 4
    try:
        g, exps, trace = run_sieve(f, L, args.Lf)
    except HypothesisError as exc:
        raise InputError(f"{exc} (witness n = {exc.witness})")
    payload = {"trace": trace.to_json(), "exponents": {str(p): i for p, i in exps.items()}}
    if g is None:
        payload["g"] = None
        return "fail", payload, trace.diagnosis
    post = check_sieve_postconditions(f, g, exps, L, args.Lf)
    payload["g"] = g.to_json()
    payload["postconditions"] = post
    status = "pass" if post["ok"] else "fail"
    if status == "pass" and trace.warnings:
        status = "warn"
    return status, payload, f"exponents {exps}, final level {g.level}"


def cmd_witness(args):
    w = build_witness(args.p, args.mu, args.D)
    (a, b), (_, d) = w.entries

    def num(x: Fraction):
        return int(x) if x.denominator == 1 else float(x)

    ok = 4 * w.det() == args.D and w.is_positive_definite() and w.is_half_integral()
    payload = {
        "T": [[num(a), num(b)], [num(b), num(d)]],
        "fourDet": num(4 * w.det()),
        "positive_definite": w.is_positive_definite(),
        "half_integral": w.is_half_integral(),
    }
    return ("pass" if ok else "fail"), payload, f"T = {payload['T']}, 4 det T = {payload['fourDet']}"


# --------------------------------------------------------------------------
# parser


def _default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thetanv", description="Exact verification drivers for theta components of Jacobi forms.")
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--timing", action="store_true", help="record wall-clock seconds in the envelope")
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    g = sub.add_parser("gauss").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("eval", parents=[common])
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.set_defaults(func=cmd_gauss_eval)
    p = g.add_parser("verify", parents=[common])
    p.add_argument("--cmax", type=int, default=200)
    p.add_argument("--min-case-count", type=int, default=0)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_gauss_verify)

    e = sub.add_parser("epsilon").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = e.add_parser("matrix", parents=[common])
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--closed", action="store_true", help="dump the closed-form matrix instead")
    p.set_defaults(func=cmd_epsilon_matrix)

    p = sub.add_parser("square-classes", parents=[common])
    p.add_argument("--m1", type=int, default=1)
    p.add_argument("--m2", type=int, required=True)
    p.add_argument("--nu0", type=int)
    p.set_defaults(func=cmd_square_classes, action=None)

    r = sub.add_parser("rank").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = r.add_parser("scan", parents=[common])
    p.add_argument("--max-index", type=int, default=105)
    p.add_argument("--levels", type=_int_list, default=None, help="odd levels N; default N = m1 for every split")
    p.add_argument("--include-even", action="store_true", help="also scan even m2")
    p.add_argument("--no-crt", action="store_true", help="skip the Kronecker-factorization checks")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_rank_scan)

    j = sub.add_parser("jacobi").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = j.add_parser("construct", parents=[common])
    p.add_argument("--form", default="phi10_1")
    p.add_argument("--prec", type=int, default=80)
    p.set_defaults(func=cmd_jacobi_construct)
    for name, func in (("vell", cmd_jacobi_vell), ("decompose", cmd_jacobi_decompose), ("check", cmd_jacobi_check)):
        p = j.add_parser(name, parents=[common])
        p.add_argument("--input", help="coefficient table JSON; default phi_10,1")
        p.add_argument("--prec", type=int, default=80)
        if name == "vell":
            p.add_argument("--ell", type=int, required=True)
        if name == "check":
            p.add_argument("--split", type=_int_list)
            p.add_argument("--ell", type=_int_list, help="apply V_ell for each listed prime first")
        p.set_defaults(func=func)
    p = j.add_parser("transform-check", parents=[common])
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--tau", type=_complex, default=2j)
    p.add_argument("--z", type=_complex, default=0.3 + 0.2j)
    p.add_argument("--tol", type=float, default=1e-8, help="bound the reported tail must meet")
    p.add_argument("--residual", type=float, default=1e-6)
    p.add_argument("--prec", type=int, default=120)
    p.set_defaults(func=cmd_jacobi_transform)

    h = sub.add_parser("halfint").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = h.add_parser("sieve", parents=[common])
    p.add_argument("--input", required=True)
    p.add_argument("--L", type=int)
    p.add_argument("--Lf", type=int, required=True)
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_halfint_sieve)

    p = sub.add_parser("witness", parents=[common])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--mu", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.set_defaults(func=cmd_witness, action=None)
    return parser


def _parameters(args) -> dict:
    skip = {"func", "group", "action", "timing", "jobs"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = [v.real, v.imag] if isinstance(v, complex) else v
    return out


def _scan_csv(rep: dict) -> str:
    buf = io.StringIO()
    cols = ["N", "m1", "m2", "cells", "passes", "failures", "crt_checks", "crt_failures"]
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for row in rep["rows"]:
        writer.writerow(row)
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = " ".join(x for x in (args.group, args.action) if x)
    start = time.perf_counter()
    try:
        status, payload, summary = args.func(args)
    except (InputError, ValueError, ArithmeticError) as exc:
        print(f"thetanv {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = round(time.perf_counter() - start, 3) if args.timing else None
    if getattr(args, "format", "json") == "csv":
        sys.stdout.write(_scan_csv(payload))
    else:
        envelope = {
            "command": command,
            "parameters": _parameters(args),
            "status": status,
            "payload": payload,
            "elapsed": elapsed,
            "tool_version": __version__,
        }
        json.dump(envelope, sys.stdout, indent=2)
        sys.stdout.write("\n")
    print(f"[{status}] {command}: {summary}", file=sys.stderr)
    return EXIT_FAIL if status == "fail" else EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
