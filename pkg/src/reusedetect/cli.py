"""Command-line front end: birthmark generation, detection, reporting, evaluation.

Exit codes: 0 success, 2 invalid input (schema/validation/IO), 64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .birthmark import build_birthmark, dumps_birthmark, loads_birthmark
from .detection import SimilarityConfig, detect, dumps_result, loads_result
from .errors import IntegrityError, ValidationError
from .evaluation import (append_csv_row, dumps_metrics, loads_ground_truth,
                         score_against_truth)
from .ir import parse_program_ir
from .lifting import load_lifting_table
from .report import build_report, dumps_report, render_dot

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_USAGE = 64

ENV_LIFTING_TABLE = "REUSEDETECT_LIFTING_TABLE"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _threshold(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"threshold must be in [0, 1], got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("value must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reusedetect",
                     description="Detect partial software reuse between disassembled binaries.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("birthmark", help="generate a program birthmark from an IR document")
    p.add_argument("ir_path", help="program IR document (JSON)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--lifting-table",
                   help=f"mnemonic lifting table (default: ${ENV_LIFTING_TABLE} or built-in x86 table)")
    p.add_argument("--parallelism", type=_positive_int, default=0,
                   help="worker threads for per-function generation (0 = auto)")

    p = sub.add_parser("detect", help="detect reuse of a target inside a candidate")
    p.add_argument("target_birthmark", help="target program birthmark (JSON)")
    p.add_argument("candidate_birthmark", help="candidate program birthmark (JSON)")
    p.add_argument("--threshold", type=_threshold, default=0.5,
                   help="similarity acceptance threshold (default 0.5)")
    p.add_argument("--max-candidates", type=_positive_int, default=0,
                   help="cap on proposed candidates per function (0 = unbounded)")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("report", help="render interpretable evidence for a detection result")
    p.add_argument("result_path", help="detection result (JSON)")
    p.add_argument("--target-birthmark", required=True)
    p.add_argument("--candidate-birthmark", required=True)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--json", dest="format", action="store_const", const="json",
                   help="shorthand for --format json")
    p.add_argument("--dot", dest="format", action="store_const", const="dot",
                   help="shorthand for --format dot")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--figures", metavar="DIR",
                   help="also render PNG figures (score distribution, matched subgraph)")

    p = sub.add_parser("eval", help="score a detection result against ground truth")
    p.add_argument("result_path", help="detection result (JSON)")
    p.add_argument("truth_path", help="ground-truth labels (JSON)")
    p.add_argument("--out", help="metrics output path (default: stdout)")
    p.add_argument("--csv", help="append one delimited metrics row to this file")

    return parser


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _lifting_table(path_arg: str | None):
    path = path_arg or os.environ.get(ENV_LIFTING_TABLE)
    return load_lifting_table(path) if path else None


def _cmd_birthmark(args: argparse.Namespace) -> int:
    table = _lifting_table(args.lifting_table)
    program = parse_program_ir(_read(args.ir_path))
    bm = build_birthmark(program, table=table, parallelism=args.parallelism)
    _emit(dumps_birthmark(bm), args.out)
    return EXIT_OK


def _cmd_detect(args: argparse.Namespace) -> int:
    tb = loads_birthmark(_read(args.target_birthmark))
    cb = loads_birthmark(_read(args.candidate_birthmark))
    config = SimilarityConfig(
        threshold=args.threshold,
        max_candidates_per_function=args.max_candidates or None,
    )
    result = detect(tb, cb, config)
    _emit(dumps_result(result), args.out)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    result = loads_result(_read(args.result_path))
    tb = loads_birthmark(_read(args.target_birthmark))
    cb = loads_birthmark(_read(args.candidate_birthmark))
    report = build_report(result, tb, cb)
    _emit(render_dot(report) if args.format == "dot" else dumps_report(report), args.out)
    if args.figures:
        from .figures import render_figures
        for path in render_figures(report, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    result = loads_result(_read(args.result_path))
    truth = loads_ground_truth(_read(args.truth_path))
    metrics = score_against_truth(result, truth)
    _emit(dumps_metrics(metrics), args.out)
    if args.csv:
        append_csv_row(args.csv, result, metrics)
    return EXIT_OK


_COMMANDS = {
    "birthmark": _cmd_birthmark,
    "detect": _cmd_detect,
    "report": _cmd_report,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, IntegrityError) as e:
        print(f"reusedetect: error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except OSError as e:
        print(f"reusedetect: error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
