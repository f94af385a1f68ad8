"""Command-line entry point: run, list, and validate experiments.

Exit codes for ``run --check``: 0 when every criterion in the summary passes,
1 when any fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from ._version import __version__
from .errors import ConfigInvalid, HdcltError
from .runner import EXPERIMENTS, load_config, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdclt",
        description="Monte Carlo experiments for high-dimensional "
                    "central-limit bounds over rectangle classes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (fallback: HDCLT_THREADS, then 1)")
    p_run.add_argument("--check", action="store_true",
                       help="exit 1 unless every summary criterion passes")
    p_run.add_argument("--out", default=None, help="output directory override")

    p_val = sub.add_parser("validate", help="parse and validate a config file")
    p_val.add_argument("config", help="path to a key = value config file")

    sub.add_parser("list", help="list available experiment tags")
    return parser


def _resolve_threads(flag) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("HDCLT_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigInvalid(f"bad HDCLT_THREADS value {env!r}") from exc
    return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list":
        for tag in EXPERIMENTS:
            print(tag)
        return 0

    try:
        config = load_config(args.config)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {config.experiment} (seed {config.seed})")
        return 0

    try:
        threads = _resolve_threads(args.threads)
        if config.threads is not None and args.threads is None:
            threads = max(1, config.threads)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        manifest = run(config, out_dir=args.out, threads=threads)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HdcltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    checks = manifest.summary.get("checks", {})
    for name, passed in sorted(checks.items()):
        print(f"{'PASS' if passed else 'FAIL'} {manifest.experiment}.{name}")
    print(f"wrote {manifest.summary_path}")
    if args.check:
        return 0 if manifest.all_checks_pass else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
