"""
Command-line front end: measures, bounds, witnesses, verification sweeps
and validation of Pickands functions, with JSON and CSV output.

    python cli.py measure --in pickands.json
    python cli.py bounds --measure rho --v 0.5 --n 201 --out bounds.csv
    python cli.py witness --measure tau --v 0.5 --t 0.5 --y 0.75
    python cli.py verify --measure rho --v 0.5 --seed 1
    python cli.py validate --in pickands.json

Exit codes: 0 ok, 2 invalid input, 3 point outside the region,
4 witness failure, 5 property or tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from envelopes import boundary_curves, witness
from errors import (DomainError, InvalidPickands, MeasureDisagreement, ParameterOutOfRange,
                    PointOutsideRegion, ToleranceNotReached, WitnessNotFound)
from measures import MeasureKind, QuadratureConfig, measure_report
from pickands import from_json, is_valid
from verification import VerifyConfig, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_OUTSIDE = 3
EXIT_WITNESS = 4
EXIT_PROPERTY = 5


def _read_json(path):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidPickands(f"input is not valid JSON: {exc}")


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _dumps(obj):
    # floats use the shortest repr that round-trips
    return json.dumps(obj, indent=2) + "\n"


def cmd_measure(args) -> int:
    A = from_json(_read_json(args.input))
    cfg = QuadratureConfig(tolerance=args.tol, max_depth=args.max_depth)
    _write(_dumps(measure_report(A, cfg)), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    table = boundary_curves(args.measure, args.v, args.n)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "lower", "upper"])
    for row in table.tolist():
        writer.writerow(["%.17g" % value for value in row])
    _write(buffer.getvalue(), args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    result = witness(args.measure, args.v, args.t, args.y)
    _write(_dumps(result.to_json()), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = VerifyConfig(samples=args.samples, n_t=args.n_t, n_y=args.n_y, n_grid=args.n_grid)
    report = run_verification(args.measure, args.v, args.seed, config)
    _write(_dumps(report), args.out)
    if not report["success"]:
        failed = [c["name"] for c in report["checks"] if not c["success"]]
        print(f"[error] properties failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        A = from_json(_read_json(args.input))
    except (InvalidPickands, ParameterOutOfRange) as exc:
        report = {"valid": False, "diagnostic": str(exc),
                  "knot_index": getattr(exc, "knot_index", None), "knots": None}
    else:
        validity = is_valid(A)
        report = {"valid": validity.valid, "diagnostic": validity.diagnostic,
                  "knot_index": validity.knot_index,
                  "knots": [[t, a] for t, a in A.knots]}
    _write(_dumps(report), args.out)
    return EXIT_OK if report["valid"] else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evcbounds",
        description="Spearman's rho, Kendall's tau and their sharp bounds for extreme-value copulas.")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level for messages on stderr (default: WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    def measure_kind(p):
        p.add_argument("--measure", required=True, type=MeasureKind,
                       choices=list(MeasureKind), metavar="{rho,tau}")
        p.add_argument("--v", required=True, type=float, help="Target value in [0, 1]")

    p = sub.add_parser("measure", help="rho and tau of a Pickands function given as JSON")
    p.add_argument("--in", dest="input", default="-", help="JSON file, or - for stdin (default)")
    p.add_argument("--out", default=None, help="Output file (default: stdout)")
    p.add_argument("--tol", type=float, default=QuadratureConfig.tolerance,
                   help="Absolute quadrature tolerance for the cross-check")
    p.add_argument("--max-depth", type=int, default=QuadratureConfig.max_depth)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("bounds", help="CSV table t,lower,upper of the region boundary")
    measure_kind(p)
    p.add_argument("--n", type=int, default=201, help="Number of grid points (default: 201)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("witness", help="Pickands function with value v passing through (t, y)")
    measure_kind(p)
    p.add_argument("--t", required=True, type=float)
    p.add_argument("--y", required=True, type=float)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="Run the property suite for one measure and target value")
    measure_kind(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--samples", type=int, default=VerifyConfig.samples)
    p.add_argument("--n-t", type=int, default=VerifyConfig.n_t)
    p.add_argument("--n-y", type=int, default=VerifyConfig.n_y)
    p.add_argument("--n-grid", type=int, default=VerifyConfig.n_grid)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("validate", help="Check the Pickands invariants of a JSON document")
    p.add_argument("--in", dest="input", default="-")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID

    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.func(args)
    except PointOutsideRegion as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_OUTSIDE
    except WitnessNotFound as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_WITNESS
    except (MeasureDisagreement, ToleranceNotReached) as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except InvalidPickands as exc:
        print(f"[error] invalid Pickands function: {exc.diagnostic}", file=sys.stderr)
        return EXIT_INVALID
    except (ParameterOutOfRange, DomainError, OSError) as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
