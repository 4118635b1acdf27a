"""Command-line front end.

Subcommands: ``simulate``, ``sweep``, ``inspect-channel``, ``papr-ccdf``,
``selftest``.  Exit codes: 0 success, 1 configuration error, 2 invariant
violation, 3 numerical guard refusal.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import runner
from .errors import ConfigError, GuardError
from .selftest import run_selftest

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_GUARD = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_common(p: _Parser, needs_config: bool = True):
    if needs_config:
        p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument(
        "--format", default="csv", choices=["csv"], help="output format (csv only)"
    )


def build_parser() -> _Parser:
    p = _Parser(prog="otfsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the scenario's SNR list")
    _add_common(sim)

    sweep = sub.add_parser("sweep", help="run with an SNR grid from the command line")
    _add_common(sweep)
    sweep.add_argument(
        "--snr",
        required=True,
        metavar="START:STOP:STEP",
        help="inclusive SNR grid in dB, e.g. 0:20:2",
    )

    insp = sub.add_parser("inspect-channel", help="write channel view CSV files")
    insp.add_argument("--config", required=True, help="scenario JSON file")
    insp.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    insp.add_argument("--out", default=".", help="output directory")

    ccdf = sub.add_parser("papr-ccdf", help="per-block PAPR CCDF of the transmit chain")
    _add_common(ccdf)

    sub.add_parser("selftest", help="run the built-in invariant suite")
    return p


def _parse_snr_grid(text: str):
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"--snr expects START:STOP:STEP, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"--snr grid {text!r} is not increasing")
    grid = []
    v = start
    while v <= stop + 1e-9:
        grid.append(round(v, 9))
        v += step
    return tuple(grid)


def _load(args) -> runner.Scenario:
    sc = runner.load_scenario(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        sc = replace(sc, seed=args.seed)
    return sc


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as f:
            f.write(text)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "selftest":
            results = run_selftest()
            for r in results:
                print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
            return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT

        sc = _load(args)
        if args.command == "simulate":
            _emit(runner.format_csv(runner.run(sc, workers=args.workers)), args.out)
        elif args.command == "sweep":
            sc = replace(sc, snr_db_list=_parse_snr_grid(args.snr))
            _emit(runner.format_csv(runner.run(sc, workers=args.workers)), args.out)
        elif args.command == "inspect-channel":
            for path in runner.inspect_channel(sc, args.out):
                print(path)
        elif args.command == "papr-ccdf":
            _emit(runner.papr_ccdf(sc), args.out)
        return EXIT_OK
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardError as e:
        print(f"numerical guard: {e}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def entry():  # console-script hook
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
