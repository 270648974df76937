"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 mathematical precondition failure,
4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from typing import Sequence

from subpressure.analysis import (
    GRID,
    KINK_TOL,
    PressureProfile,
    affinity_dimension,
    build_profile,
    check_analyticity_condition,
    curve_data,
    find_transitions,
    one_sided_derivatives,
    transition_bound,
)
from subpressure.dirichlet import ROOT_TOL
from subpressure.errors import (
    InputError,
    NonContractingWarning,
    NotTriangularError,
    PreconditionError,
    ResourceCapError,
)
from subpressure.examples import EXAMPLES
from subpressure.linalg import TRIANGULAR_TOL
from subpressure.oracle import ENUMERATION_CAP, finite_k_pressure
from subpressure.ordered import DiagonalSystem, reduce_to_diagonal
from subpressure.systemfile import SystemFile, load_basis, load_system, parse_system, schema

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_CAP = 4

ORACLE_SLACK = 1e-10


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.12g}"


def _emit(args, record: dict | list[dict], out=None) -> None:
    out = out or sys.stdout
    if args.format == "json":
        out.write(json.dumps(record, indent=2) + "\n")
        return
    rows = record if isinstance(record, list) else [record]
    fields = list(rows[0]) if rows else []
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row.values()])


def _load(args) -> SystemFile:
    sf = load_system(args.file)
    if getattr(args, "basis", None):
        basis = load_basis(args.basis)
        if sf.diagonal_form:
            raise InputError("a basis cannot be combined with a diagonal-form system")
        sf = SystemFile(sf.n, sf.system, basis, False)
    return sf


def _diagonal(sf: SystemFile, tol: float = TRIANGULAR_TOL) -> DiagonalSystem:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonContractingWarning)
        ds = reduce_to_diagonal(sf.system, sf.basis, tol)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return ds


def _profile(args, sf: SystemFile | None = None) -> PressureProfile:
    sf = sf or _load(args)
    return build_profile(_diagonal(sf), grid=args.grid, tol=args.tol)


def cmd_eval(args) -> int:
    if not args.s >= 0 or not math.isfinite(args.s):
        raise InputError(f"s must be a finite number >= 0, got {args.s}")
    profile = _profile(args)
    s = profile.snap(args.s)
    seg = profile.segment_right(s)
    left, right = one_sided_derivatives(profile, s)
    _emit(
        args,
        {
            "s": args.s,
            "P": profile.value(args.s),
            "active_key": seg.label,
            "equivalent_keys": ";".join(k.label for k in seg.equivalent) if args.format == "csv"
            else [k.label for k in seg.equivalent],
            "left_derivative": left,
            "right_derivative": right,
            "contracting": profile.ds.contracting,
        },
    )
    return EXIT_OK


def cmd_transitions(args) -> int:
    profile = _profile(args)
    found = find_transitions(profile, kink_tol=args.kink)
    rows = [
        {
            "s": t.s,
            "kind": t.kind.value,
            "left_derivative": t.left_derivative,
            "right_derivative": t.right_derivative,
        }
        for t in found
    ]
    if args.format == "csv":
        _emit(args, rows)
    else:
        _emit(
            args,
            {
                "n": profile.n,
                "count": profile.ds.count,
                "transitions": rows,
                "non_integer": [r["s"] for r in rows if r["kind"] == "envelope-crossing"],
                "bound": transition_bound(profile.n, profile.ds.count),
            },
        )
    return EXIT_OK


def cmd_dimension(args) -> int:
    profile = _profile(args)
    _emit(args, {"dimension": affinity_dimension(profile)})
    return EXIT_OK


def cmd_curve(args) -> int:
    profile = _profile(args)
    table = curve_data(profile, args.s_lo, args.s_hi, args.points)
    buf = io.StringIO()
    if args.format == "json":
        buf.write(json.dumps({"columns": list(table.columns), "rows": [list(r) for r in table.rows]}) + "\n")
    else:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_oracle(args) -> int:
    sf = _load(args)
    est = finite_k_pressure(sf.system, args.s, args.k, cap=args.cap)
    try:
        profile = build_profile(_diagonal(sf), grid=args.grid, tol=args.tol)
    except NotTriangularError:
        closed = None
    else:
        closed = profile.value(args.s)
    if closed is None:
        verdict = "N/A"
    else:
        verdict = "PASS" if est.brackets(closed, ORACLE_SLACK) else "FAIL"
    _emit(
        args,
        {
            "s": args.s,
            "k": est.k,
            "words": sf.system.count**est.k,
            "value": est.value,
            "lower": est.lower,
            "upper": est.upper,
            "closed_form": closed,
            "diagonal": sf.system.is_diagonal(),
            "verdict": verdict,
        },
    )
    return EXIT_OK


def cmd_bound(args) -> int:
    _emit(args, {"n": args.n, "count": args.count, "bound": transition_bound(args.n, args.count)})
    return EXIT_OK


def cmd_check(args) -> int:
    sf = _load(args)
    key = check_analyticity_condition(_diagonal(sf), args.m)
    record = {"m": args.m, "found": key is not None}
    if key is None:
        record["key"] = "none"
    elif args.format == "csv":
        record["key"] = key.label
    else:
        record["key"] = {"head": list(key.head), "pivot": key.pivot, "label": key.label}
    _emit(args, record)
    return EXIT_OK


def cmd_example(args) -> int:
    if args.name not in EXAMPLES:
        raise InputError(f"unknown example {args.name!r}; choose from {', '.join(EXAMPLES)}")
    sf = parse_system(EXAMPLES[args.name])
    text = sf.to_json()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_schema(args) -> int:
    sys.stdout.write(json.dumps(schema(), indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subpressure",
        description="Subadditive pressure of diagonal and triangular matrix systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--tol", type=float, default=ROOT_TOL, help="root isolation tolerance in s")
    numeric.add_argument("--grid", type=int, default=GRID, help="envelope scan points per unit interval")
    numeric.add_argument("--basis", help="JSON file with a triangularising basis")

    def add(name, func, help_, parents=(numeric,), file=True, fmt="json"):
        p = sub.add_parser(name, help=help_, parents=list(parents))
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default=fmt)
        if file:
            p.add_argument("file", help="system file (JSON)")
        p.set_defaults(func=func)
        return p

    p = add("eval", cmd_eval, "pressure, active key and one-sided derivatives at s")
    p.add_argument("s", type=float)

    p = add("transitions", cmd_transitions, "list phase transitions")
    p.add_argument("--kink", type=float, default=KINK_TOL, help="derivative jump threshold")

    add("dimension", cmd_dimension, "affinity dimension (zero of the pressure)")

    p = add("curve", cmd_curve, "ordered pressures and pressure on a grid", fmt="csv")
    p.add_argument("s_lo", type=float)
    p.add_argument("s_hi", type=float)
    p.add_argument("points", type=int)
    p.add_argument("--out", help="output path (default: standard output)")

    p = add("oracle", cmd_oracle, "brute-force finite-k pressure against the closed form")
    p.add_argument("s", type=float)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP)

    p = add("bound", cmd_bound, "upper bound on the number of phase transitions", parents=(), file=False)
    p.add_argument("n", type=int)
    p.add_argument("count", type=int)

    p = add("check", cmd_check, "search for a key that is maximal on all of [m, m+1]")
    p.add_argument("m", type=int)

    p = add("example", cmd_example, "write a built-in system file", parents=(), file=False, fmt=None)
    p.add_argument("name", help=f"one of: {', '.join(EXAMPLES)}")
    p.add_argument("--out", help="output path (default: standard output)")

    add("schema", cmd_schema, "print the system file JSON schema", parents=(), file=False, fmt=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
