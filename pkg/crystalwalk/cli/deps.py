"""
Shared options and loaders for subcommands (configuration, seed, tolerance)
"""

import argparse
import logging
from datetime import datetime, timezone
from typing import List, Optional

from crystalwalk import __version__
from crystalwalk.core.config import settings
from crystalwalk.core.errors import ConfigError
from crystalwalk.models.lattice import LatticeKind
from crystalwalk.schemas.config import RunConfig
from crystalwalk.schemas.report import ReportDocument, ReportMetadata, Tolerance, VerificationReport

logger = logging.getLogger(__name__)


def common_options() -> argparse.ArgumentParser:
    """Options every subcommand accepts"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument(
        "--lattice",
        choices=[k.value for k in LatticeKind],
        help="Built-in symmetric reference configuration when --config is absent (default: ice)",
    )
    parser.add_argument("--seed", type=int, help="64-bit seed (falls back to CRYSTALWALK_SEED)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: available cores)")
    parser.add_argument("--log-level", help="Logging level (default: LOG_LEVEL setting)")
    return parser


def load_config(args: argparse.Namespace, **overrides) -> RunConfig:
    """
    Build the run configuration from --config or the reference defaults

    Flags given on the command line win over file values. The seed falls
    back to CRYSTALWALK_SEED, then to 0.

    Raises:
        ConfigError: Unreadable config file, or --lattice contradicting it
        pydantic.ValidationError: Invalid keys or values
    """
    if args.config:
        config = RunConfig.load(args.config)
        if args.lattice and args.lattice != config.lattice.value:
            raise ConfigError("lattice", f"--lattice {args.lattice} contradicts the config file ({config.lattice.value})")
    else:
        config = RunConfig(lattice=LatticeKind(args.lattice or LatticeKind.ICE.value))

    updates = {k: v for k, v in overrides.items() if v is not None}
    if args.seed is not None:
        updates["seed"] = args.seed
    elif config.seed is None:
        updates["seed"] = settings.CRYSTALWALK_SEED if settings.CRYSTALWALK_SEED is not None else 0
        logger.info(f"no seed given, using {updates['seed']}")
    if updates:
        data = config.model_dump()
        data.update(updates)
        config = RunConfig.model_validate(data)
    return config


def parse_tolerance(entries: Optional[List[str]]) -> Tolerance:
    """
    Tolerance from repeated NAME=VALUE flags

    Raises:
        ConfigError: Unknown name or malformed value
    """
    values = {}
    for entry in entries or []:
        name, sep, raw = entry.partition("=")
        if not sep or name not in Tolerance.model_fields:
            raise ConfigError("tol", f"expected one of {sorted(Tolerance.model_fields)} as NAME=VALUE, got '{entry}'")
        try:
            values[name] = float(raw)
        except ValueError:
            raise ConfigError(f"tol.{name}", f"'{raw}' is not a number")
    return Tolerance(**values)


def build_document(reports: List[VerificationReport], lattice: str, seed: Optional[int]) -> ReportDocument:
    return ReportDocument(
        metadata=ReportMetadata(
            version=__version__,
            generated_at=datetime.now(timezone.utc),
            lattice=lattice,
            seed=seed,
        ),
        reports=reports,
    )


def print_outcome(document: ReportDocument) -> None:
    counts = {"pass": 0, "flagged": 0, "fail": 0}
    for report in document.reports:
        counts[report.status.value] += 1
        if report.status.value != "pass":
            print(f"{report.status.value.upper():8} {report.check}: observed={report.observed} target={report.target}")
    print(f"{counts['pass']} passed, {counts['flagged']} flagged, {counts['fail']} failed")
