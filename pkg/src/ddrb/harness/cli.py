"""Command line entry point: ``ddrb run | list-presets | summarize``."""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

from ..errors import ConfigurationError, NumericError
from ..metrics import summary_rows
from .config import parse_config
from .presets import DESCRIPTIONS, PRESETS, preset
from .runner import load_trace_dir, run_experiment, write_summary_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddrb", description="Regret balancing experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV traces")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", help="path to a YAML config file")
    run.add_argument("--reps", type=int, help="number of repetitions")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--threads", type=int, default=1, help="worker processes")
    run.add_argument("--trace", choices=("full", "checkpoints"), default="checkpoints")
    run.add_argument("--meta", help="meta-learner override, e.g. D3RB, CorralHigh, SingleBase:1")
    run.add_argument("--horizon", type=int, help="override the number of rounds")
    run.add_argument("--long-horizon", action="store_true",
                     help="use the 20000-round horizon for a preset")

    sub.add_parser("list-presets", help="list the built-in presets")

    summ = sub.add_parser("summarize", help="recompute summary.csv from a run directory")
    summ.add_argument("directory", help="run directory or its traces/ subdirectory")
    summ.add_argument("--out", help="write the summary here instead of stdout")
    return parser


def _run(args) -> int:
    if args.preset:
        config = preset(args.preset, long_horizon=args.long_horizon)
    else:
        config = parse_config(args.config)
    changes = {}
    if args.reps is not None:
        changes["repetitions"] = args.reps
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if changes:
        config = replace(config, **changes)
    if args.meta:
        config = config.with_meta(args.meta)
    config.validate()
    start = time.perf_counter()
    artifact = run_experiment(config, out_dir=args.out, workers=args.threads,
                              trace_mode=args.trace)
    elapsed = time.perf_counter() - start
    print(f"{config.name} / {config.meta.label}: {config.repetitions} reps x "
          f"{config.horizon} rounds in {elapsed:.1f}s")
    if artifact.summary:
        last = artifact.summary[-1]
        print(f"final regret {last.mean_regret:.2f} +/- {last.two_se:.2f}")
    print(f"wrote {args.out}")
    return 0


def _summarize(args) -> int:
    trace_dir = args.directory
    if os.path.isdir(os.path.join(trace_dir, "traces")):
        trace_dir = os.path.join(trace_dir, "traces")
    rounds, values = load_trace_dir(trace_dir)
    rows = summary_rows(values, rounds)
    if args.out:
        write_summary_csv(args.out, rows)
        return 0
    print("round,mean_regret,two_se,mean_regret_scale")
    for r in rows:
        print(f"{r.round},{r.mean_regret!r},{r.two_se!r},{r.mean_regret_scale!r}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name in PRESETS:
                print(f"{name:6s} {DESCRIPTIONS[name]}")
            return 0
        if args.command == "run":
            return _run(args)
        return _summarize(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
