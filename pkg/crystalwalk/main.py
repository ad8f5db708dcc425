"""
Command-line entry point
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from crystalwalk import __version__
from crystalwalk.core.config import settings
from crystalwalk.core.errors import ConfigError, CrystalWalkError, TableError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crystalwalk",
        description="Random walks on the ice-1h and graphite-2h lattices",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include subcommands
    from crystalwalk.cli import asymptotics, selftest, simulate, verify

    simulate.register(subparsers)
    asymptotics.register(subparsers)
    verify.register(subparsers)
    selftest.register(subparsers)
    return parser


def configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _describe_validation(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        key = ".".join(str(p) for p in error.get("loc", ())) or "<root>"
        parts.append(f"config key '{key}': {error.get('msg')}")
    return "; ".join(parts)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch to the subcommand

    Returns:
        0 on success, 1 when a verification check failed, 2 for bad input
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {_describe_validation(e)}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ConfigError, TableError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except CrystalWalkError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(run_cli(sys.argv[1:]))
