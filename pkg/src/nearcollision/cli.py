"""Command line: nearcollision CASE [STAGE] [options]."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import CASE_IDS
from .errors import ConfigError, PrecisionError, ReductionStall
from .pipeline import STAGES, RunFlags, emit_table, render, run

__all__ = ["main", "run", "emit_table"]

EXIT_OK, EXIT_CONFIG, EXIT_PRECISION, EXIT_STALL = 0, 2, 3, 4
MIN_DIGITS = 30


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nearcollision",
                                description="Integral points by elliptic logarithms for the "
                                            "binomial near-collision curves.")
    p.add_argument("case", help=f"one of {', '.join(CASE_IDS)} or a path to a case YAML file")
    p.add_argument("stage", nargs="?", default="pipeline", choices=STAGES)
    p.add_argument("--precision", type=int, default=60, metavar="DIGITS",
                   help="working decimal digits (the reduction raises this as needed)")
    p.add_argument("--mmax", type=int, default=3, help="search box max|m_i| (default 3)")
    p.add_argument("--workers", type=int, default=1, help="processes for the search filter")
    p.add_argument("--long-run", action="store_true",
                   help="search the whole box up to the reduced bound (days of CPU)")
    p.add_argument("--checkpoint", metavar="PATH", help="resumable progress file for the search")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.precision < MIN_DIGITS:
        print(f"precision failure: --precision must be at least {MIN_DIGITS} digits", file=sys.stderr)
        return EXIT_PRECISION
    flags = RunFlags(args.precision, args.mmax, args.workers, args.long_run, args.checkpoint)
    try:
        report = run(args.case, args.stage, flags)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except ReductionStall as exc:
        print(f"reduction stalled: {exc}", file=sys.stderr)
        return EXIT_STALL
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
