"""Subcommand front-end: one reproducible experiment run per invocation.

    mfadvlab <subcommand> --config cfg.json [--out DIR] [--seed U64]
                          [--threads N] [--subset N]

Flag overrides win over config values; the manifest written beside the
outputs records the merged result.  Exit codes: 0 success, 1 run-level
failure (non-finite loss, self-test mismatch), 2 config/usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path

from .dataio import ConfigError, read_config
from .experiments import RUNNERS
from .parallel import default_workers


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mfadvlab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="experiment config JSON")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker count (default: machine cores)")
        sp.add_argument("--subset", type=int, default=None,
                        help="truncate the dataset to its first N records")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = read_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if "seed" not in cfg:
            raise ConfigError("config needs a 'seed' field (or pass --seed)")
        if args.subset is not None:
            cfg["subset"] = args.subset
        out_dir = Path(args.out if args.out is not None else cfg.get("out", "."))
        out_dir.mkdir(parents=True, exist_ok=True)
        threads = args.threads if args.threads is not None else default_workers()
        result = RUNNERS[args.subcommand](cfg, out_dir, threads=threads)
    except (ConfigError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.subcommand == "opnorm-selftest" and not result["ok"]:
        print("operator-norm self-test FAILED", file=sys.stderr)
        return 1
    if isinstance(result, dict) and getattr(result.get("trace"), "aborted", False):
        print("run aborted on non-finite loss; partial trace written", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
