"""Command line entry point.

Usage: gbwave <kind> [--config PATH] [--out DIR] [--bit-exact] [--threads N]
       [--no-plots]

Kinds: table1, error_vs_h, snapshot, ray, dispersion, continuous_rates.
The config file uses the flat `key = value` grammar documented in
gbwave.config; with no config every kind runs with the standard defaults.
Exit code is 0 iff all requested runs completed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import KINDS, ConfigError, parse_config
from .experiments import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbwave",
        description="Gaussian-beam experiments for the lattice wave equation",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        k = sub.add_parser(kind, help=f"run the {kind} experiment")
        k.add_argument("--config", type=Path, default=None,
                       help="flat key = value configuration file")
        k.add_argument("--out", type=Path, default=Path("gbwave_out"),
                       help="output directory (default: ./gbwave_out)")
        k.add_argument("--bit-exact", action="store_true",
                       help="force serial execution for byte-identical output")
        k.add_argument("--threads", type=int, default=None,
                       help="worker threads for independent ladder runs")
        k.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else ""
        spec = parse_config(text)
        if spec.kind is not None and spec.kind != args.kind:
            raise ConfigError(
                f"config requests kind {spec.kind!r} but the command is {args.kind!r}")
        updates = {"kind": args.kind}
        if args.threads is not None:
            updates["threads"] = args.threads
        if args.bit_exact:
            updates["bit_exact"] = True
        spec = replace(spec, **updates)
    except (ConfigError, OSError) as exc:
        print(f"gbwave: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(spec, args.out, make_plots=not args.no_plots)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status
        print(f"gbwave: {args.kind} failed: {exc}", file=sys.stderr)
        return 1

    for err in result.errors:
        print(f"gbwave: run {err['run']}: {err['error']}", file=sys.stderr)
    print(f"{args.kind}: wrote {len(result.files)} files to {args.out}")
    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
