"""
`simulate` subcommand
"""

import argparse
import logging

from crystalwalk.cli.deps import common_options, load_config
from crystalwalk.models.walk import RngSpec, WalkMode
from crystalwalk.schemas.simulation import WalkResponse
from crystalwalk.services.walker import simulate
from crystalwalk.utils.export import write_json, write_trajectory_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", parents=[common_options()], help="Simulate one walk from the origin")
    parser.add_argument("--steps", type=int, help="Number of steps (default 10000)")
    parser.add_argument("--trajectory", help="Keep every state and write them to this CSV file")
    parser.add_argument("--summary", help="Write the walk summary JSON here instead of stdout")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args, steps=args.steps)
    trajectory_path = args.trajectory or config.outputs.trajectory
    summary_path = args.summary or config.outputs.summary
    mode = WalkMode.TRAJECTORY if trajectory_path else config.mode
    table = config.to_table()

    logger.info(f"simulating {config.lattice.value} walk: {config.steps} steps, seed {config.seed}")
    record = simulate(table, config.steps, RngSpec(seed=config.seed), mode=mode)

    if trajectory_path:
        write_trajectory_csv(record, table.geometry, trajectory_path)
    response = WalkResponse.from_record(record)
    if summary_path:
        write_json(response, summary_path)
    else:
        print(response.model_dump_json(indent=2))
    return 0
