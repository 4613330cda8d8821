"""Command-line front end.

Exit codes: 0 when everything requested holds, 1 when a condition or an
audit fails, 2 on errors (bad input, singular matrices, solver failures).
Reports go to stdout; data CSVs go to ``--out`` (stdout if omitted).
"""

import argparse
import sys

import numpy as np

from . import conditions, ensemble, homotopy, tv
from .errors import DDLassoError
from .matrix import gram
from .textio import fmt, read_matrix, read_vector

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _print_report(report, as_json):
    print(report.to_json() if as_json else report.to_record() + "\n")


def cmd_check(args):
    a = read_matrix(args.matrix)
    reports = [conditions.check_inverse_gram_dd(a, args.allow_underdetermined, args.eps)]
    if args.donoho_k is not None:
        reports.append(conditions.check_donoho_kstep(a, args.donoho_k))
    if args.coherence:
        reports.append(conditions.check_coherence_bound(gram(a)))
    if args.positive_cone:
        reports.append(conditions.check_positive_cone_exhaustive(
            a, max_n=args.max_n, exhaustive=args.exhaustive))
    for r in reports:
        _print_report(r, args.json)
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FAIL


def _load_problem(matrix_file, y_file):
    a = read_matrix(matrix_file)
    y = read_vector(y_file)
    return homotopy.LassoProblem(a, y)


def _pareto_csv(path):
    lines = ["lambda,l1_norm,residual_sq"]
    for bp, (l1, rss) in zip(path.breakpoints, path.pareto()):
        lines.append(f"{fmt(bp.lam)},{fmt(l1)},{fmt(rss)}")
    return "\n".join(lines) + "\n"


def cmd_path(args):
    p = _load_problem(args.matrix, args.y)
    path = homotopy.solve_path(p, lambda_min=args.lambda_min)
    _emit(homotopy.format_path_csv(path), args.out)
    if args.audit:
        report = homotopy.monotonicity_audit(path)
        print("# audit")
        print(f"breakpoints={len(path)}")
        print(f"remove_events={len(path.removals)}")
        print(report.summary())
        print("# pareto")
        sys.stdout.write(_pareto_csv(path))
    return EXIT_OK


def cmd_tv(args):
    y = read_vector(args.y)
    d = read_matrix(args.D) if args.D else None
    t = tv.TVProblem(y, d)
    tvp = tv.solve_tv_path(t, lambda_min=args.lambda_min)
    _emit(tv.format_tv_csv(tvp), args.out)
    if args.audit:
        report = homotopy.monotonicity_audit(tvp.lasso_path)
        print("# audit (u = D x coordinates)")
        print(f"breakpoints={len(tvp.lasso_path)}")
        print(f"remove_events={len(tvp.lasso_path.removals)}")
        print(report.summary())
        print("x_cardinality=" + " ".join(str(c) for c in tvp.x_cardinality()))
    return EXIT_OK


def cmd_mc(args):
    if args.sweep:
        specs = ensemble.default_sweep(args.trials, args.seed)
    else:
        p = args.p if args.dist == "bernoulli" else None
        specs = [ensemble.EnsembleSpec(args.dist, args.m, args.n, args.trials, args.seed, p)]
    reports = [ensemble.run_frequency_study(s, workers=args.workers,
                                            allow_underdetermined=args.allow_underdetermined)
               for s in specs]
    _emit(ensemble.format_reports_csv(reports), args.out)
    for r in reports:
        if r.caveat:
            print(f"# caveat {r.spec.distribution} m={r.spec.m} n={r.spec.n}: {r.caveat}", file=sys.stderr)
    return EXIT_OK


def cmd_audit(args):
    with open(args.path_csv, encoding="utf-8") as fh:
        text = fh.read()
    p = _load_problem(args.matrix, args.y)
    path = homotopy.path_from_csv(text, p)
    failures = homotopy.kkt_failures(path, tol=args.tol)
    report = homotopy.monotonicity_audit(path)
    print(f"breakpoints={len(path)}")
    print(f"kkt_ok={str(not failures).lower()}")
    for k in failures:
        bp = path.breakpoints[k]
        print(f"kkt_failure=breakpoint {k} (lambda={fmt(bp.lam)}, event={bp.event.label()})")
    print(report.summary())
    if failures or (args.require_monotone and not report.ok):
        return EXIT_FAIL
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ddlasso",
        description="Exact l1 solution paths and certificates for monotone active-set growth.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="certify conditions on a dictionary A")
    c.add_argument("matrix", help="matrix file for A")
    c.add_argument("--donoho-k", type=int, metavar="K", help="also test the sparsity bound for K")
    c.add_argument("--coherence", action="store_true", help="also test the Gram ratio bound")
    c.add_argument("--positive-cone", action="store_true", help="also test the positive cone condition")
    c.add_argument("--exhaustive", action="store_true",
                   help="enumerate every sign pattern in the positive cone test")
    c.add_argument("--max-n", type=int, default=10, help="column limit for the positive cone test")
    c.add_argument("--eps", type=float, default=0.0, help="dominance slack")
    c.add_argument("--allow-underdetermined", action="store_true", help="do not refuse m < n")
    c.add_argument("--json", action="store_true", help="JSON reports, one per line")
    c.set_defaults(func=cmd_check)

    pa = sub.add_parser("path", help="solve the full solution path")
    pa.add_argument("matrix", help="matrix file for A")
    pa.add_argument("y", help="vector file for y")
    pa.add_argument("--lambda-min", type=float, default=0.0)
    pa.add_argument("--audit", action="store_true", help="print monotonicity audit and Pareto pairs")
    pa.add_argument("--out", help="write the path CSV here")
    pa.set_defaults(func=cmd_path)

    t = sub.add_parser("tv", help="total-variation denoising path")
    t.add_argument("y", help="vector file for y")
    t.add_argument("--D", help="analysis operator file (default: first difference)")
    t.add_argument("--lambda-min", type=float, default=0.0)
    t.add_argument("--audit", action="store_true")
    t.add_argument("--out", help="write the TV path CSV here")
    t.set_defaults(func=cmd_tv)

    mc = sub.add_parser("mc", help="Monte Carlo frequency of the DD condition")
    mc.add_argument("--dist", choices=ensemble.DISTRIBUTIONS, default="normal")
    mc.add_argument("--p", type=float, default=0.5, help="Bernoulli probability of a 1")
    mc.add_argument("--m", type=int, default=20)
    mc.add_argument("--n", type=int, default=3)
    mc.add_argument("--trials", type=int, default=1000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--workers", type=int, default=1)
    mc.add_argument("--sweep", action="store_true",
                    help="all four distributions over m in {n,2n,4n}, n = 2..10")
    mc.add_argument("--allow-underdetermined", action="store_true")
    mc.add_argument("--out", help="write the CSV table here")
    mc.set_defaults(func=cmd_mc)

    au = sub.add_parser("audit", help="re-verify a path CSV against its problem")
    au.add_argument("path_csv")
    au.add_argument("matrix", help="matrix file for A")
    au.add_argument("y", help="vector file for y")
    au.add_argument("--tol", type=float, default=1e-8)
    au.add_argument("--require-monotone", action="store_true",
                    help="also fail (exit 1) when the path is not monotone")
    au.set_defaults(func=cmd_audit)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DDLassoError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
