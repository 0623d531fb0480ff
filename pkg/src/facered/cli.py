"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or invalid
input, unsupported cone or approximation), 3 recovery failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import fixtures, io
from .chain import to_reduced
from .errors import FaceredError, SchemaError
from .model import Side, problem_dims, smat, svec
from .recover import check_condition1, recover_counterpart, lift_solution
from .reduce import reduce
from .settings import DEFAULT_TOLERANCES

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RECOVERY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = _Parser(prog="facered", description="Partial facial reduction for conic programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    info = sub.add_parser("info", help="print block sizes and the affine dimension r")
    info.add_argument("file")
    info.add_argument("--side", default="dual", choices=["primal", "dual"])

    red = sub.add_parser("reduce", help="reduce one side of a problem")
    red.add_argument("--side", required=True, choices=["primal", "dual"])
    red.add_argument("--approx", default="d", help="d, dd (sdd is recognised but cannot be searched)")
    red.add_argument("--in", dest="input", required=True)
    red.add_argument("--out", required=True, help="reduced problem (.json, otherwise SDPA)")
    red.add_argument("--chain", help="face-chain archive to write")
    red.add_argument("--log", help="JSON reduction log to write")
    red.add_argument("--max-iters", type=int, default=10)
    red.add_argument("--tol", type=float, default=None,
                     help=f"relative eigenvalue cutoff for face updates (default {DEFAULT_TOLERANCES.null_rel:g})")
    red.add_argument("--cond2-drop", action="store_true",
                     help="omit the cross equations when the remaining ones imply them")
    red.add_argument("--formulation", default="condensed", choices=["condensed", "explicit"])

    rec = sub.add_parser("recover", help="map a reduced solution back to the original problem")
    rec.add_argument("--chain", required=True)
    rec.add_argument("--reduced-solution", required=True)
    rec.add_argument("--out", required=True)

    fx = sub.add_parser("fixture", help="write a built-in example problem")
    fx.add_argument("name", choices=sorted(fixtures.BUILDERS))
    fx.add_argument("--out", required=True)
    fx.add_argument("--power", type=int, default=1, help="Kronecker power (cprank)")
    fx.add_argument("--form", default="dual", choices=["dual", "primal"], help="cprank encoding")
    fx.add_argument("--seed", type=int, default=0, help="planted instances")
    fx.add_argument("--n", type=int, default=6)
    fx.add_argument("--d", type=int, default=2)

    st = sub.add_parser("selftest", help="reduce and recover the built-in examples")
    st.add_argument("--large", action="store_true", help="include the second Kronecker power of cprank")
    return parser


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_info(args, out):
    problem = io.read_problem(args.file)
    dims = problem_dims(problem, args.side)
    print(dims, file=out)
    return EXIT_OK


def cmd_reduce(args, out):
    problem = io.read_problem(args.input)
    tol = DEFAULT_TOLERANCES.with_overrides(null_rel=args.tol)
    result = reduce(problem, args.side, args.approx, max_iters=args.max_iters, tol=tol,
                    drop_equations_via_condition2=args.cond2_drop, formulation=args.formulation)
    io.write_problem(result.reduced, args.out)
    if args.chain:
        _write(args.chain, io.write_chain(result.chain))
    if args.log:
        _write(args.log, io.write_log(result.report))
    print(result.report.summary(), file=out)
    return EXIT_OK


def cmd_recover(args, out, err):
    chain = io.read_chain(_read(args.chain))
    x_red, y_red = io.read_solution(_read(args.reduced_solution))
    problem = chain.problem
    if chain.side is Side.DUAL:
        if x_red is None:
            raise SchemaError("$.x", "a dual-side chain needs the reduced equality-form point")
        outcome = recover_counterpart(chain, x_red)
        x, y = outcome.x, y_red
    else:
        if y_red is None:
            raise SchemaError("$.y", "a primal-side chain needs the reduced multipliers")
        outcome = recover_counterpart(chain, y_red)
        x = None if x_red is None else lift_solution(chain, x_red)
        y = outcome.y
    if not outcome.ok:
        print(f"recovery failed at step {outcome.failed_step} ({outcome.witness}): {outcome.detail}",
              file=err)
        if len(chain.steps) == 1 and chain.side is Side.DUAL:
            face = chain.final
            k = outcome.failed_block if outcome.failed_block is not None else 0
            X = lift_solution(chain, x_red)[problem.block_slice(k)]
            if face[k].U is not None:
                holds = check_condition1(smat(X), face[k].U, face[k].V)
                print(f"single-step recovery condition holds: {holds}", file=err)
        return EXIT_RECOVERY
    _write(args.out, io.write_solution(x=x, y=y))
    alphas = ", ".join(f"{a:.6g}" for a in outcome.alphas)
    print(f"recovered ({len(outcome.alphas)} step(s), alpha = [{alphas}])", file=out)
    return EXIT_OK


def selftest(large=False, out=sys.stdout):
    """Reduce and recover the built-in examples; returns the number of failed checks."""
    checks = []

    def check(name, fn):
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except FaceredError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name} ({time.perf_counter() - start:.2f}s) {detail}", file=out)

    def reduces_to(fx, dims):
        def run():
            res = reduce(fx.problem, fx.side, fx.family)
            got = res.report.reduced_face_dims
            return got == dims, f"{res.report.summary()}"
        return run

    check("motivating", reduces_to(fixtures.motivating(), [1]))
    check("diag5", reduces_to(fixtures.diag5(), [1]))
    check("dd4", reduces_to(fixtures.dd4(), [2]))
    check("cprank power 1", reduces_to(fixtures.cprank(power=1), [7, 8, 9]))

    def recovery():
        fx = fixtures.recovery3()
        res = reduce(fx.problem, "dual")
        good = recover_counterpart(res.chain, to_reduced(res.chain, svec(fx.dual_points["success"])))
        bad = recover_counterpart(res.chain, to_reduced(res.chain, svec(fx.dual_points["failure"])))
        return good.ok and not bad.ok, f"alpha = {good.alphas}, failure witness = {bad.witness}"

    check("recovery3", recovery)
    if large:
        check("cprank power 2", reduces_to(fixtures.cprank(power=2), [49, 50, 81]))
    return checks.count(False)


def cmd_fixture(args, out):
    if args.name == "cprank":
        fx = fixtures.cprank(power=args.power, form=args.form)
    elif args.name == "planted":
        fx = fixtures.planted(args.seed, n=args.n, d=args.d)
    else:
        fx = fixtures.build(args.name)
    io.write_problem(fx.problem, args.out)
    print(f"{fx.name}: {fx.problem!r}", file=out)
    return EXIT_OK


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:          # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "info":
            return cmd_info(args, out)
        if args.command == "reduce":
            return cmd_reduce(args, out)
        if args.command == "recover":
            return cmd_recover(args, out, err)
        if args.command == "fixture":
            return cmd_fixture(args, out)
        if args.command == "selftest":
            return EXIT_OK if selftest(args.large, out) == 0 else EXIT_DATA
    except (FaceredError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_DATA
    return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
