"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
operational errors.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from decimal import Decimal, InvalidOperation

from .checkpoints import CHECKPOINT_ENV, CheckpointError
from .declarations import DeclarationError
from .harness import RunConfig, run
from .sieve import DEFAULT_SEGMENT_SIZE

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("primebounds")


def integer(text: str) -> int:
    """Integers written plainly or in scientific notation, e.g. 1e8 or 3.06e7."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite() or value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def positive_int(text: str) -> int:
    n = integer(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return n


def real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--format", dest="report_format", choices=("text", "structured"), default="text")
    g.add_argument("--checkpoint-dir", default=os.environ.get(CHECKPOINT_ENV),
                   help=f"checkpoint directory (default: ${CHECKPOINT_ENV})")
    g.add_argument("--segment-size", type=positive_int, default=DEFAULT_SEGMENT_SIZE)
    g.add_argument("--workers", type=positive_int, default=1)
    g.add_argument("--declarations", help="declarations file overriding the shipped one")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="primebounds", description="Desk-scale verification of explicit prime estimates.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("constants", parents=[common], help="named constants table")

    p = sub.add_parser("scan", parents=[common], help="sieve to a limit and write checkpoints")
    p.add_argument("--limit", type=integer, required=True)

    p = sub.add_parser("verify", parents=[common], help="scan theta, psi or pi - li against a bound")
    p.add_argument("target", choices=("theta", "psi", "theorem2"))
    p.add_argument("--limit", type=integer, required=True)
    p.add_argument("--bound", choices=("epsilon0", "ratio", "lemma1"), default="epsilon0")
    p.add_argument("--R", type=real)
    p.add_argument("--coefficient", type=real)
    p.add_argument("--claimed-from", type=integer, help="claimed onset of the bound")

    p = sub.add_parser("certify", parents=[common], help="pi - li certificate at x0")
    p.add_argument("target", choices=("pi2",))
    p.add_argument("--x0", type=integer, default=10**8)

    p = sub.add_parser("gaps", parents=[common], help="largest prime gap below a limit")
    p.add_argument("--limit", type=integer, required=True)
    p.add_argument("--expect", type=integer)

    p = sub.add_parser("short-intervals", parents=[common], help="primes in [x, x(1 + 1/(c log^2 x))]")
    p.add_argument("--limit", type=integer, required=True)
    p.add_argument("--c", type=real, default=111.0)
    p.add_argument("--expect", type=integer)

    p = sub.add_parser("cascade", parents=[common], help="iterate gap bounds down to small x")
    p.add_argument("--x1", type=integer)
    p.add_argument("--gap1", type=integer)
    p.add_argument("--c", type=real, default=111.0)

    p = sub.add_parser("pinteger", parents=[common], help="decide or enumerate P-integers")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=integer)
    g.add_argument("--enumerate-upto", type=integer)

    p = sub.add_parser("pomerance", parents=[common], help="exclusion sweep at huge k")
    p.add_argument("--log10k", type=real, default=1805.0)
    p.add_argument("--Lmin", type=integer)
    p.add_argument("--Lmax", type=integer, default=3800)

    p = sub.add_parser("ramanujan", parents=[common], help="scan Ramanujan's inequality")
    p.add_argument("--limit", type=integer, required=True)
    p.add_argument("--emit-violations", metavar="PATH")
    p.add_argument("--long-run", action="store_true", help="allow limits up to 4e10")

    p = sub.add_parser("replicate", parents=[common], help="run every acceptance check")
    p.add_argument("--limit", type=integer)
    return parser


_RUN_KEYS = {"command", "report_format", "checkpoint_dir", "segment_size", "workers", "declarations", "verbose"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    ns = vars(args)
    options = {k: v for k, v in ns.items() if k not in _RUN_KEYS and v is not None}
    return RunConfig(
        command=args.command,
        options=options,
        checkpoint_dir=args.checkpoint_dir,
        segment_size=args.segment_size,
        workers=args.workers,
        report_format=args.report_format,
        declarations=args.declarations,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except CheckpointError as exc:
        durable = exc.last_durable.x if exc.last_durable else None
        print(f"error: {exc} (last durable checkpoint x={durable})", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError, OSError, DeclarationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = report.to_structured() if cfg.report_format == "structured" else report.to_text()
    print(out)
    if not report.passed:
        print("failed: " + ", ".join(c.paper_anchor for c in report.failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK
