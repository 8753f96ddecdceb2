"""Command line front end for the batch workflows.

Subcommands mirror the library pipeline: `simulate` writes model
statistics and sampled counts, `certify` bounds the min-entropy of
ingested counts, `sweep` scans a mu grid, `bin` coarse-grains
three-detector counts to the qubit protocol.  Exit codes: 0 success,
2 configuration or parse error, 3 solver infeasible or failed,
4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .pipeline import (RunConfig, ingest_counts, run_bin, run_certify,
                       run_simulate, run_sweep, sdp_manifest)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

OUT_ENV_VAR = "MDIQRNG_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdiqrng",
        description="certify private randomness from click statistics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, counts: bool = False) -> None:
        p.add_argument("--config", required=True,
                       help="JSON run configuration")
        if counts:
            p.add_argument("--counts", required=True,
                           help="counts CSV to ingest")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV_VAR}, "
                            "then the config's out_dir, then the working "
                            "directory)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    p = sub.add_parser("simulate", help="model statistics, optionally sampled")
    common(p)

    p = sub.add_parser("certify", help="bound min-entropy from counts")
    common(p, counts=True)
    p.add_argument("--emit-sdp", action="store_true",
                   help="also dump the reduced program as sdp.json")

    p = sub.add_parser("sweep", help="certify across the configured mu grid")
    common(p)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel sweep processes")

    p = sub.add_parser("bin", help="coarse-grain qutrit counts to qubit")
    common(p, counts=True)
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_json(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def _out_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    for candidate in (args.out, os.environ.get(OUT_ENV_VAR), config.out_dir):
        if candidate:
            return Path(candidate)
    return Path(".")


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result = run_simulate(config, out=_out_dir(args, config))
    for path in result.written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_certify(args: argparse.Namespace) -> int:
    config = _load_config(args)
    counts = ingest_counts(args.counts)
    out = _out_dir(args, config)
    result = run_certify(config, counts, out=out)
    if args.emit_sdp:
        sdp_path = out / "sdp.json"
        sdp_path.write_text(json.dumps(sdp_manifest(config, counts),
                                       indent=2, sort_keys=True) + "\n")
        print(f"wrote {sdp_path}")
    print(f"status: {result.status}")
    print(f"min-entropy: {result.min_entropy_bits:.6f} bits/round")
    print(f"guessing probability: {result.p_guess:.9f}")
    print(f"report: {out / 'report.json'}")
    if result.status != "certified":
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result = run_sweep(config, workers=args.workers,
                       out=_out_dir(args, config))
    certified = sum(1 for p in result.points if p.status_qutrit == "certified")
    print(f"swept {len(result.points)} points "
          f"({certified} qutrit certifications)")
    for path in result.written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_bin(args: argparse.Namespace) -> int:
    config = _load_config(args)
    counts = ingest_counts(args.counts)
    run_bin(config, counts, out=_out_dir(args, config))
    out = _out_dir(args, config)
    name = "binned_counts.csv" if counts.kind == "count" else "binned_statistics.csv"
    print(f"wrote {out / name}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "certify": _cmd_certify,
    "sweep": _cmd_sweep,
    "bin": _cmd_bin,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
