"""Command-line interface: ``permatch <subcommand> ...``.

Exit codes: 0 success, 2 unreadable input or bad arguments, 3 invalid
values (dimensions, ranges), 4 an iterative solver did not converge.
Exact results print as integers or ``p/q``; floating results print with 12
significant digits.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import bounds as bd
from .capacity import (ConvergenceError, approx_perm_m, log_capacity,
                       log_capacity_via_sinkhorn, p_kA_oracle)
from .core import (FormatError, RationalMatrix, SimpleGraph, SymmetricMatrix,
                   format_graph, format_matrix, format_number, graph_to_adjacency,
                   is_doubly_stochastic, parse_graph, parse_matrix)
from .exact import brute_force_haf_m, brute_force_perm_m, haf_m, matching_sequence, perm_m
from .random_regular import exact_expectation_small, monte_carlo_expectation
from .spectral import classify_complete_multipartite

EXACT_PERM_LIMIT = 14


class UsageError(Exception):
    """Bad command-line arguments."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt_float(x: float) -> str:
    return f"{x:.12g}"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def _load_matrix(path: str) -> RationalMatrix:
    return parse_matrix(_read(path))


def _load_graph(path: str) -> SimpleGraph:
    return parse_graph(_read(path))


def _dump(args, text: str) -> None:
    if getattr(args, "dump", None):
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit(out, obj) -> None:
    print(json.dumps(obj), file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_count(args, out) -> int:
    a = _load_matrix(args.matrix)
    _dump(args, format_matrix(a))
    value = brute_force_perm_m(a, args.m) if args.mode == "brute" else perm_m(a, args.m)
    print(format_number(value), file=out)
    return 0


def _load_symmetric(args) -> SymmetricMatrix:
    if args.graph:
        g = _load_graph(args.graph)
        _dump(args, format_graph(g))
        return graph_to_adjacency(g)
    a = _load_matrix(args.matrix)
    _dump(args, format_matrix(a))
    return SymmetricMatrix.from_rational(a)


def cmd_haf(args, out) -> int:
    b = _load_symmetric(args)
    value = brute_force_haf_m(b, args.m) if args.mode == "brute" else haf_m(b, args.m)
    print(format_number(value), file=out)
    return 0


def cmd_matchings(args, out) -> int:
    if args.graph:
        g = _load_graph(args.graph)
        _dump(args, format_graph(g))
        seq = matching_sequence(g)
    else:
        a = _load_matrix(args.matrix)
        _dump(args, format_matrix(a))
        seq = matching_sequence(a)
    values = [format_number(seq[k]) for k in range(len(seq))]
    if args.json:
        _emit(out, {"sequence": values})
    else:
        print(" ".join(values), file=out)
    return 0


def cmd_capacity(args, out) -> int:
    a = _load_matrix(args.matrix)
    _dump(args, format_matrix(a))
    if args.route == "sinkhorn":
        if not a.is_square or args.k != a.rows:
            raise ValueError("the sinkhorn route needs a square matrix and k = n")
        log_cap = log_capacity_via_sinkhorn(a, tol=args.tol, max_iter=args.max_iter)
    else:
        res = log_capacity(p_kA_oracle(a, args.k), tol=args.tol, max_iter=args.max_iter)
        if not res.converged and not res.diverged_to_zero:
            raise ConvergenceError(f"capacity search stopped at gradient norm "
                                   f"{res.gradient_norm:.3g} after {res.iterations} iterations")
        log_cap = res.log_capacity
    cap = 0.0 if log_cap == -math.inf else math.exp(log_cap)
    if args.json:
        _emit(out, {"capacity": fmt_float(cap),
                    "log_capacity": None if cap == 0 else fmt_float(log_cap)})
    else:
        print(fmt_float(cap), file=out)
    return 0


def cmd_approx_perm(args, out) -> int:
    a = _load_matrix(args.matrix)
    _dump(args, format_matrix(a))
    res = approx_perm_m(a, args.m, tol=args.tol, max_iter=args.max_iter)
    if not res.converged and not res.diverged_to_zero:
        raise ConvergenceError("capacity search did not reach its tolerance")
    _emit(out, {"lower": fmt_float(res.lower), "upper": fmt_float(res.upper)})
    return 0


def cmd_bounds(args, out) -> int:
    a = _load_matrix(args.matrix)
    _dump(args, format_matrix(a))
    if not a.is_square:
        raise ValueError("bounds need a square matrix")
    n, m = a.rows, args.m
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    stochastic = is_doubly_stochastic(a, Fraction(1, 10 ** 9))
    r = args.r if args.r is not None else max(a.column_support())
    table: dict[str, str | None] = dict.fromkeys(
        ("ft", "generalized", "gurvits_schrijver", "frtverv3", "exact"))
    if stochastic:
        table["ft"] = format_number(bd.ft_lower_bound(n, m))
        if m == n and 1 <= r <= n:
            table["gurvits_schrijver"] = fmt_float(bd.gurvits_schrijver_bound(n, r))
        if args.s is not None and m < n:
            table["frtverv3"] = fmt_float(bd.frtverv3_bound(n, m, r, args.s))
    if all(any(x != 0 for x in a.row(i)) for i in range(n)):
        res = log_capacity(p_kA_oracle(a, m))
        if not res.converged and not res.diverged_to_zero:
            raise ConvergenceError("capacity search did not reach its tolerance")
        profile = bd.RegularityProfile.from_matrix(a, m)
        value = 0.0 if res.diverged_to_zero else math.exp(
            bd.log_generalized_ft_bound(profile, res.log_capacity))
        table["generalized"] = fmt_float(value)
    if n <= EXACT_PERM_LIMIT:
        table["exact"] = format_number(perm_m(a, m))
    if args.json:
        _emit(out, table)
    else:
        for key, value in table.items():
            print(f"{key:<18} {value if value is not None else 'n/a'}", file=out)
    return 0


def cmd_classify(args, out) -> int:
    g = _load_graph(args.graph)
    _dump(args, format_graph(g))
    cls = classify_complete_multipartite(g)
    _emit(out, {"hyperbolic": cls.is_complete_multipartite,
                "classes": [list(c) for c in cls.classes],
                "isolated": list(cls.isolated)})
    return 0


def cmd_entropy(args, out) -> int:
    rows = bd.entropy_curve(args.r, args.grid, include_p=args.include_p or ())
    text = bd.format_entropy_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_expect(args, out) -> int:
    formula = format_number(bd.expected_perm_m(args.n, args.r, args.m))
    if args.exact:
        _emit(out, {"formula": formula,
                    "enumerated": format_number(exact_expectation_small(args.n, args.r, args.m))})
    else:
        est = monte_carlo_expectation(args.n, args.r, args.m, args.trials, args.seed)
        _emit(out, {"formula": formula, "mean": fmt_float(est.mean),
                    "stderr": fmt_float(est.stderr), "trials": est.trials})
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    def dump_opt(p):
        p.add_argument("--dump", metavar="PATH", help="write the parsed input back out in canonical form")

    p = add("count", cmd_count, "perm_m of a matrix (number of m-matchings)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("ryser", "brute"), default="ryser")
    dump_opt(p)

    p = add("haf", cmd_haf, "haf_m of a symmetric matrix or graph")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix")
    src.add_argument("--graph")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("ryser", "brute"), default="ryser")
    dump_opt(p)

    p = add("matchings", cmd_matchings, "full matching sequence of a graph or bipartite matrix")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--matrix")
    p.add_argument("--json", action="store_true")
    dump_opt(p)

    p = add("capacity", cmd_capacity, "capacity of S_k(Ax)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--route", choices=("convex", "sinkhorn"), default="convex")
    p.add_argument("--json", action="store_true")
    dump_opt(p)

    p = add("approx-perm", cmd_approx_perm, "capacity sandwich for perm_m")
    p.add_argument("--matrix", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=10_000)
    dump_opt(p)

    p = add("bounds", cmd_bounds, "closed-form lower bounds for perm_m")
    p.add_argument("--matrix", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, help="nonzeros per column (default: the observed maximum)")
    p.add_argument("--s", type=int)
    p.add_argument("--json", action="store_true")
    dump_opt(p)

    p = add("classify", cmd_classify, "is x^T A(G) x positive hyperbolic")
    p.add_argument("--graph", required=True)
    dump_opt(p)

    p = add("entropy", cmd_entropy, "fh, gh and hK curves as CSV")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--grid", type=float, default=0.01)
    p.add_argument("--include-p", type=float, action="append", metavar="P")
    p.add_argument("--out")

    p = add("expect", cmd_expect, "mean of perm_m over random r-regular bipartite multigraphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    return parser


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"permatch: error: {exc}", file=err)
        return 2
    except FormatError as exc:
        print(f"permatch: input error: {exc}", file=err)
        return 2
    except ConvergenceError as exc:
        print(f"permatch: not converged: {exc}", file=err)
        return 4
    except ValueError as exc:
        print(f"permatch: invalid value: {exc}", file=err)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
