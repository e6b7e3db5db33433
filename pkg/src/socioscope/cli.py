"""Command-line entry point.

One subcommand per pipeline stage plus ``run`` for the full pipeline.
Flag values override config-file values, which override defaults; the
output directory can also come from the SOCIOSCOPE_OUT environment
variable (flag beats environment beats config).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import ConfigError, DependencyError, SocioscopeError
from .pipeline import STAGES, execute, load_config

OUT_ENV_VAR = "SOCIOSCOPE_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socioscope",
        description="Batch analytics for multi-community social-media corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("-v", "--verbose", action="store_true",
                       help="debug logging on stderr")
        p.add_argument("-q", "--quiet", action="store_true",
                       help="warnings and errors only")
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="global seed (overrides config)")
        p.add_argument("--deterministic", action="store_true", default=None,
                       help="force sequential, fully seeded execution")
        p.add_argument("--force", action="store_true",
                       help="rerun stages even when up to date")
        p.add_argument("--workers", type=int, help="max parallel workers")
        p.add_argument("--progress-json", action="store_true",
                       help="emit machine-readable stage events on stderr")

    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        add_common(p)

    p = sub.add_parser("run", help="run all stages (or --stages subset)")
    add_common(p)
    p.add_argument("--stages", help="comma-separated stage subset")
    return parser


class _JsonProgressHandler(logging.Handler):
    def emit(self, record):
        payload = {"level": record.levelname.lower(), "message": record.getMessage()}
        print(json.dumps(payload), file=sys.stderr)


def _setup_logging(args) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logger = logging.getLogger("socioscope")
    logger.setLevel(level)
    logger.handlers.clear()
    if getattr(args, "progress_json", False):
        logger.addHandler(_JsonProgressHandler())
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
        logger.addHandler(handler)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args)
    logger = logging.getLogger("socioscope")

    overrides = {
        "out_dir": args.out or os.environ.get(OUT_ENV_VAR),
        "seed": args.seed,
        "workers": args.workers,
    }
    if args.deterministic:
        overrides["deterministic"] = True

    if args.command == "run":
        stages = None
        if args.stages:
            stages = [s.strip() for s in args.stages.split(",") if s.strip()]
    else:
        stages = [args.command]

    try:
        config = load_config(args.config, overrides)
        code, manifest = execute(config, stages=stages, force=args.force)
    except (ConfigError, DependencyError) as exc:
        logger.error("%s", exc)
        return 1
    except SocioscopeError as exc:
        logger.error("%s", exc)
        return 1

    for stage, entry in manifest["stages"].items():
        logger.info("%s: %s (%d artifacts)", stage, entry["status"],
                    len(entry["artifacts"]))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
