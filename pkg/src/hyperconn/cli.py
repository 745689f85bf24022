"""Command-line front end.

Exit codes: 0 success / all checks passed, 1 a check failed, 2 usage or
domain error, 3 exact-computation budget exceeded.  Stochastic commands
require an explicit --seed, echo it in the output, and are byte-identical
for a given seed regardless of --threads.

CSV column orders are frozen (golden-file friendly):
  solve:  r,input_kind,input,xi,rho,log_xi,d_star,residual
  prob:   r,s,m,form,log_p,p,regime,flags
  count:  r,s,m,form,log_c,regime,flags
  sample: one edge per line, vertices comma-separated, header n,r,m
  sweep:  s,m,exact_log_p,asymptotic_log_p,bcm_log_p,abs_gap
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys


from ._version import __version__
from .errors import BudgetError, DomainError, HyperconnError, NotApplicableError
from .analytic import bcm
from .analytic.fixed_point import (
    branching_mean,
    mean_degree_log,
    solve_xi_from_d,
    solve_xi_from_dbar,
)
from .analytic.formulas import CountForm, log_connected_count, log_connectivity
from .enumeration import (
    exact_connected_table,
    exact_log_p,
    load_table,
    save_table,
    total_count,
)
from .simulation import (
    RNG_ALGORITHM,
    BatchParams,
    export_batch,
    run_batch,
    sample_gnp,
    sample_gsm,
    trial_rng,
)
from .stats import (
    connectivity_check,
    llt_check,
    sweep_exact_vs_asymptotic,
    tree_census_check,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _default_threads() -> int:
    env = os.environ.get("HYPERCONN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _print_report(report, fmt: str) -> int:
    if fmt == "json":
        print(report.to_json())
    else:
        print(report.to_text(), end="")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_solve(args) -> int:
    if (args.dbar is None) == (args.d is None):
        raise DomainError("provide exactly one of --dbar or --d")
    if args.dbar is not None:
        fp = solve_xi_from_dbar(args.r, args.dbar)
        d_star = branching_mean(fp) * math.exp((args.r - 1) * fp.log_xi)
        kind, value = "dbar", args.dbar
        residual = abs(mean_degree_log(args.r, fp.log_xi) - args.dbar) / args.dbar
        xi, rho, log_xi = fp.xi, fp.rho, fp.log_xi
    else:
        bp = solve_xi_from_d(args.r, args.d)
        kind, value = "d", args.d
        xi, rho, log_xi, d_star = bp.xi, 1.0 - bp.xi, bp.log_xi, bp.d_star
        if bp.xi < 1.0:
            residual = abs((-bp.log_xi) / (-math.expm1((args.r - 1) * bp.log_xi)) - args.d) / args.d
        else:
            residual = 0.0
    if args.format == "json":
        print(json.dumps({
            "version": __version__, "r": args.r, kind: value, "xi": xi,
            "rho": rho, "log_xi": log_xi, "d_star": d_star, "residual": residual,
        }, sort_keys=True))
    else:
        print("r,input_kind,input,xi,rho,log_xi,d_star,residual")
        print(f"{args.r},{kind},{value!r},{xi!r},{rho!r},{log_xi!r},{d_star!r},{residual!r}")
    return EXIT_OK


def _cmd_prob(args) -> int:
    if args.form == "bcm":
        if args.r != 2:
            raise DomainError("--form bcm applies to r=2 only")
        log_p = bcm.bcm_log_p(args.s, args.m)
        regime, flags = "bcm", ()
    else:
        est = log_connectivity(args.r, args.s, args.m)
        log_p, regime, flags = est.log_value, est.regime.value, est.flags
    p = math.exp(log_p) if log_p < 0 else min(1.0, math.exp(log_p))
    if args.format == "json":
        print(json.dumps({
            "version": __version__, "r": args.r, "s": args.s, "m": args.m,
            "form": args.form, "log_p": log_p, "p": p, "regime": regime,
            "flags": list(flags),
        }, sort_keys=True))
    else:
        print("r,s,m,form,log_p,p,regime,flags")
        print(f"{args.r},{args.s},{args.m},{args.form},{log_p!r},{p!r},{regime},{'|'.join(flags)}")
    return EXIT_OK


def _cmd_count(args) -> int:
    if args.form == "exact":
        table = exact_connected_table(args.r, args.s, m_max=args.m)
        value = table.get(args.s, args.m)
        if args.format == "json":
            print(json.dumps({
                "version": __version__, "r": args.r, "s": args.s, "m": args.m,
                "form": "exact", "count": str(value),
                "total": str(total_count(args.r, args.s, args.m)),
            }, sort_keys=True))
        else:
            print("r,s,m,form,count")
            print(f"{args.r},{args.s},{args.m},exact,{value}")
        return EXIT_OK
    form = CountForm.EXACT_BINOMIAL if args.form == "binomial" else CountForm.STIRLING
    est = log_connected_count(args.r, args.s, args.m, form)
    if args.format == "json":
        print(json.dumps({
            "version": __version__, "r": args.r, "s": args.s, "m": args.m,
            "form": args.form, "log_c": est.log_value, "regime": est.regime.value,
            "flags": list(est.flags),
        }, sort_keys=True))
    else:
        print("r,s,m,form,log_c,regime,flags")
        print(f"{args.r},{args.s},{args.m},{args.form},{est.log_value!r},{est.regime.value},{'|'.join(est.flags)}")
    return EXIT_OK


def _cmd_sample(args) -> int:
    rng = trial_rng(args.seed, 0)
    if args.model == "gnp":
        from .simulation import p_from_d

        h = sample_gnp(args.r, args.n, p_from_d(args.r, args.n, args.d), rng)
    else:
        h = sample_gsm(args.r, args.n, args.m, rng)
    print(f"# hyperconn {__version__} sample model={args.model} r={args.r} "
          f"n={args.n} seed={args.seed} rng={RNG_ALGORITHM}")
    print(f"n,r,m\n{h.n},{h.r},{h.edges.shape[0]}")
    for row in h.edges.tolist():
        print(",".join(str(v) for v in row))
    return EXIT_OK


def _batch_from_args(args, model: str) -> BatchParams:
    return BatchParams(
        model=model,
        r=args.r,
        n=args.n,
        trials=args.trials,
        master_seed=args.seed,
        d=getattr(args, "d", None),
        m=getattr(args, "m", None),
        threads=args.threads,
    )


def _cmd_llt(args) -> int:
    batch = run_batch(_batch_from_args(args, "gnp"))
    report = llt_check(batch)
    if args.export_batch:
        with open(args.export_batch, "w", encoding="ascii") as fh:
            fh.write(export_batch(batch) + "\n")
    return _print_report(report, args.format)


def _cmd_census(args) -> int:
    batch = run_batch(_batch_from_args(args, "gnp"))
    report = tree_census_check(batch, k_max=args.k_max)
    if args.export_batch:
        with open(args.export_batch, "w", encoding="ascii") as fh:
            fh.write(export_batch(batch) + "\n")
    return _print_report(report, args.format)


def _cmd_conn(args) -> int:
    report = connectivity_check(
        args.r, args.n, args.m, args.trials, args.seed, threads=args.threads
    )
    return _print_report(report, args.format)


def _cmd_sweep(args) -> int:
    s_list = [int(tok) for tok in args.s.split(",")]
    m_max = max(round(args.dbar * s / 2) for s in s_list)
    if args.table and os.path.exists(args.table):
        table = load_table(args.table)
        if table.r != 2 or table.s_max < max(s_list) or (
            table.m_max is not None and table.m_max < m_max
        ):
            raise DomainError(f"table {args.table} does not cover the sweep")
    else:
        table = exact_connected_table(2, max(s_list), m_max=m_max)
        if args.table:
            save_table(table, args.table)
    report = sweep_exact_vs_asymptotic(table, s_list, args.dbar)
    if args.format == "csv":
        print("s,m,exact_log_p,asymptotic_log_p,bcm_log_p,abs_gap")
        for s in s_list:
            m = round(args.dbar * s / 2)
            exact = exact_log_p(table, s, m)
            est = log_connectivity(2, s, m).log_value
            est_bcm = bcm.bcm_log_p(s, m)
            print(f"{s},{m},{exact!r},{est!r},{est_bcm!r},{abs(exact - est)!r}")
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED
    return _print_report(report, args.format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperconn",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"hyperconn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = {"choices": ("human", "csv", "json"), "default": "human"}

    p = sub.add_parser("solve", help="solve the fixed point from --dbar or --d")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--dbar", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("prob", help="asymptotic connectivity probability")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--form", choices=("universal", "bcm"), default="universal")
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_prob)

    p = sub.add_parser("count", help="connected-hypergraph count (exact or asymptotic)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--form", choices=("exact", "binomial", "stirling"), default="binomial")
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_count)

    p = sub.add_parser("sample", help="sample one hypergraph and print its edges")
    p.add_argument("--model", choices=("gnp", "gsm"), required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("llt", help="giant-component local-limit check report")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--export-batch", default=None, help="write batch JSON here")
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_llt)

    p = sub.add_parser("census", help="small tree-component census report")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--export-batch", default=None)
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_census)

    p = sub.add_parser("conn", help="connectivity Monte Carlo check")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="vertex count s")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_conn)

    p = sub.add_parser("sweep", help="exact vs asymptotic log-probability sweep (r=2)")
    p.add_argument("--s", required=True, help="comma-separated increasing vertex counts")
    p.add_argument("--dbar", type=float, required=True)
    p.add_argument("--table", default=None, help="count-table file to reuse/create")
    p.add_argument("--format", **fmt)
    p.set_defaults(fn=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DomainError, NotApplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HyperconnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
