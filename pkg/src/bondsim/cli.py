"""Command-line entry point: ``bondsim run | irr-theory | filterbank-demo``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenario import (
    ConfigError,
    NumericalError,
    resolve_out_dir,
    run_filterbank_demo,
    run_irr_theory,
    run_scenario,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bondsim", description="Channel-bonding receiver simulation.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (default: $BONDSIM_OUT or ./bondsim_out)")
    run.add_argument("--seed", type=int, help="override the impairment seed")

    th = sub.add_parser("irr-theory", help="theoretical IRR from two path responses")
    th.add_argument("response1")
    th.add_argument("response2")
    th.add_argument("--amplitude-corrected", action="store_true")
    th.add_argument("--out", help="curve CSV path (default: <outdir>/irr_theory.csv)")

    fb = sub.add_parser("filterbank-demo", help="compare real-sampled filter banks with I/Q alignment")
    fb.add_argument("config")
    fb.add_argument("--out", help="output directory")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            report = run_scenario(args.config, args.out, args.seed)
            summary = {k: report.get(k) for k in ("raw_irr_db", "corrected_irr_db", "sinr_raw_db",
                                                  "sinr_corrected_db", "reconstruction_gain_db")}
            print(json.dumps(summary, sort_keys=True))
        elif args.command == "irr-theory":
            if args.out:
                out = Path(args.out)
            else:
                out = resolve_out_dir() / "irr_theory.csv"
            out.parent.mkdir(parents=True, exist_ok=True)
            freqs, irr = run_irr_theory(args.response1, args.response2, args.amplitude_corrected, out)
            print(f"{out}: {freqs.size} points, min {irr.min():.3f} dB, max {irr.max():.3f} dB")
        else:
            summary = run_filterbank_demo(args.config, args.out)
            print(json.dumps(summary["banks"], sort_keys=True))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
