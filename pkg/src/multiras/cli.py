"""Command-line front end for batch balancing, validation and reports.

Exit codes: 0 success, 1 input/validation error, 2 balancing did not
converge (the solution file is still written, flagged in diagnostics),
3 infeasible zero structure. Machine-readable output goes through
``--json`` (full float precision); human tables round to 6 significant
digits. No environment variables affect numerics.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .balancing import (
    BalanceConfig,
    OrderPolicy,
    TerminationMode,
    balance,
    check_margin_compatibility,
    margin_residual,
)
from .errors import (
    DimensionError,
    IdentityViolationError,
    IncompatibleMarginsError,
    MultirasError,
    NegativeValueError,
    ShapeMismatchError,
    SingularMatrixError,
    TensorFileError,
    ZeroDenominatorError,
    ZeroFiberPositiveMarginError,
)
from .ingest import read_io_table, read_margins, read_tensor, write_grid, write_tensor
from .io_analysis import leontief_inverse, predict_resources, technical_coefficients
from .metrics import ZERO_POLICIES, distance_matrix, relative_deviation

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_INFEASIBLE = 3

_INPUT_ERRORS = (
    TensorFileError,
    IdentityViolationError,
    IncompatibleMarginsError,
    ShapeMismatchError,
    DimensionError,
    NegativeValueError,
    SingularMatrixError,
    ZeroDenominatorError,
    OSError,
    ValueError,
)


def _dump_json(payload, path=None):
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fmt(value):
    """Human-readable number: 6 significant digits."""
    return f"{value:.6g}"


def _parse_order(spec: str, seed) -> OrderPolicy:
    if spec == "ascending":
        return OrderPolicy.fixed_ascending()
    if spec == "random":
        return OrderPolicy.random_per_iteration(0 if seed is None else seed)
    try:
        order = [int(part) for part in spec.split(",")]
    except ValueError:
        raise ValueError(
            f"--order must be 'ascending', 'random' or a comma-separated "
            f"permutation like '1,0,2', got {spec!r}"
        ) from None
    return OrderPolicy.fixed_custom(order)


def cmd_balance(args) -> int:
    tensor = read_tensor(args.tensor)
    margins = read_margins(args.margins)
    config = BalanceConfig(
        max_iterations=args.max_iter,
        delta_threshold=args.delta,
        margin_threshold=args.margin_tol,
        order_policy=_parse_order(args.order, args.seed),
        termination_mode=TerminationMode(args.mode),
    )
    start = time.perf_counter()
    result = balance(tensor, margins, config)
    wall = time.perf_counter() - start
    write_tensor(result.solution, args.output)
    diagnostics = {
        "converged": result.converged,
        "iterations": result.iterations_run,
        "final_delta": result.final_delta,
        "final_margin_residual": result.final_margin_residual,
        "termination_reason": result.termination_reason.value,
        "kernel_backend": BACKEND,
        "solution_file": str(args.output),
        "wall_time_seconds": wall,
    }
    _dump_json(diagnostics, args.diagnostics)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_check_margins(args) -> int:
    margins = read_margins(args.margins)
    tolerance = (
        args.tolerance
        if args.tolerance is not None
        else args.rtol * margins.grand_total()
    )
    violations = check_margin_compatibility(margins, tolerance)
    if args.json:
        _dump_json(
            {
                "compatible": not violations,
                "tolerance": tolerance,
                "violations": [
                    {
                        "dim_a": v.dim_a,
                        "dim_b": v.dim_b,
                        "index": list(v.index),
                        "lhs": v.lhs,
                        "rhs": v.rhs,
                    }
                    for v in violations
                ],
            }
        )
    elif violations:
        print(f"{len(violations)} violation(s) at tolerance {_fmt(tolerance)}:")
        for v in violations:
            print(f"  {v}")
    else:
        print(f"margins compatible at tolerance {_fmt(tolerance)}")
    return EXIT_OK if not violations else EXIT_INPUT_ERROR


def cmd_compare(args) -> int:
    names = args.names.split(",") if args.names else None
    if names is not None and len(names) != len(args.tables):
        raise ValueError(f"--names lists {len(names)} names for {len(args.tables)} tables")
    tables = []
    for i, path in enumerate(args.tables):
        name = names[i] if names else Path(path).stem
        tables.append((name, read_tensor(path)))
    dist = distance_matrix(tables)
    if args.json:
        _dump_json({"names": list(dist.names), "matrix": dist.values.tolist()})
    else:
        width = max(12, max(len(n) for n in dist.names) + 2)
        print("".ljust(width) + "".join(n.ljust(width) for n in dist.names))
        for i, name in enumerate(dist.names):
            cells = "".join(_fmt(dist.values[i, j]).ljust(width) for j in range(len(dist.names)))
            print(name.ljust(width) + cells)
    return EXIT_OK


def cmd_deviations(args) -> int:
    reference = read_tensor(args.reference)
    estimate = read_tensor(args.estimate)
    report = relative_deviation(
        reference,
        estimate,
        zero_policy=args.zero_policy,
        reference_name=Path(args.reference).stem,
        estimate_name=Path(args.estimate).stem,
    )
    if args.output:
        write_grid(args.output, report.dim_names, report.labels, report.relative_deviation)
    summary = dict(report.summary)
    summary["cells_exceeding"] = {str(k): v for k, v in summary["cells_exceeding"].items()}
    if args.json:
        _dump_json(
            {
                "reference": report.reference_name,
                "estimate": report.estimate_name,
                "zero_policy": report.zero_policy,
                "summary": summary,
            }
        )
    else:
        print(f"relative deviations of {report.estimate_name} vs {report.reference_name}")
        max_abs = summary["max_abs_relative"]
        mean_abs = summary["mean_abs_relative"]
        print(f"  max |dev|:  {'n/a' if max_abs is None else _fmt(max_abs)}")
        print(f"  mean |dev|: {'n/a' if mean_abs is None else _fmt(mean_abs)}")
        print(f"  frobenius of difference: {_fmt(summary['frobenius_of_difference'])}")
        print(f"  flagged cells: {summary['flagged_cells']}")
        for thr, count in summary["cells_exceeding"].items():
            print(f"  cells with |dev| > {thr}: {count}")
    return EXIT_OK


def cmd_leontief(args) -> int:
    table = read_io_table(args.table)
    coefficients = technical_coefficients(table, denominator=args.denominator)
    inverse = leontief_inverse(coefficients)
    if args.output:
        write_grid(args.output, table.flows.dim_names, table.flows.labels, inverse)
    if args.json:
        _dump_json({"denominator": args.denominator, "leontief_inverse": inverse.tolist()})
    elif not args.output:
        for row in inverse:
            print("  ".join(_fmt(v) for v in row))
    return EXIT_OK


def cmd_predict(args) -> int:
    table = read_io_table(args.table)
    coefficients = technical_coefficients(table, denominator=args.denominator)
    inverse = leontief_inverse(coefficients)
    predicted = predict_resources(inverse, table.v1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(predicted - table.p) / np.where(table.p != 0.0, table.p, 1.0)
    if args.output:
        write_grid(args.output, (table.flows.dim_names[0],), (table.flows.labels[0],), predicted)
    if args.json:
        _dump_json(
            {
                "denominator": args.denominator,
                "predicted_resources": predicted.tolist(),
                "table_resources": table.p.tolist(),
                "max_relative_deviation": float(rel.max()),
            }
        )
    else:
        print("industry  predicted  table  |rel dev|")
        for i, label in enumerate(table.flows.labels[0]):
            print(f"{label}  {_fmt(predicted[i])}  {_fmt(table.p[i])}  {_fmt(rel[i])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiras",
        description="Balance nonnegative tensors against margin totals and analyze IO tables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("balance", help="balance a tensor file against a margin manifest")
    p.add_argument("tensor", help="long-format CSV tensor file")
    p.add_argument("margins", help="margin manifest JSON")
    p.add_argument("--output", "-o", required=True, help="solution CSV path")
    p.add_argument("--diagnostics", help="write diagnostics JSON here instead of stdout")
    p.add_argument("--max-iter", type=int, default=10_000, help="iteration cap (default 10000)")
    p.add_argument("--delta", type=float, default=0.0, help="step-size threshold, 0 disables (default 0)")
    p.add_argument("--margin-tol", type=float, default=1e-8, help="margin residual threshold (default 1e-8)")
    p.add_argument(
        "--order",
        default="ascending",
        help="'ascending', 'random', or a comma-separated permutation like '2,0,1'",
    )
    p.add_argument("--seed", type=int, default=None, help="seed for --order random (default 0)")
    p.add_argument(
        "--mode",
        choices=[m.value for m in TerminationMode],
        default=TerminationMode.ANY.value,
        help="which stopping rule(s) may end the run (default any)",
    )
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("check-margins", help="check pairwise margin compatibility")
    p.add_argument("margins", help="margin manifest JSON")
    p.add_argument("--tolerance", type=float, default=None, help="absolute tolerance")
    p.add_argument(
        "--rtol",
        type=float,
        default=1e-6,
        help="tolerance relative to the margins' grand total (default 1e-6)",
    )
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_margins)

    p = sub.add_parser("compare", help="pairwise Frobenius distances between tensor files")
    p.add_argument("tables", nargs="+", help="two or more tensor files")
    p.add_argument("--names", help="comma-separated display names")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("deviations", help="relative deviation report of estimate vs reference")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--zero-policy", choices=ZERO_POLICIES, default="flag")
    p.add_argument("--output", "-o", help="write the deviation grid CSV here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_deviations)

    p = sub.add_parser("leontief", help="total requirements matrix of an IO table")
    p.add_argument("table", help="IO table manifest JSON")
    p.add_argument("--denominator", choices=("resources", "output"), default="resources")
    p.add_argument("--output", "-o", help="write the inverse as a grid CSV")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_leontief)

    p = sub.add_parser("predict", help="predict total resources from final demand")
    p.add_argument("table", help="IO table manifest JSON")
    p.add_argument("--denominator", choices=("resources", "output"), default="resources")
    p.add_argument("--output", "-o", help="write the predicted vector as a CSV")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ZeroFiberPositiveMarginError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
