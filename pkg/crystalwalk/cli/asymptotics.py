"""
`asymptotics` subcommand
"""

import argparse

from crystalwalk.cli.deps import common_options, load_config
from crystalwalk.schemas.asymptotics import AsymptoticsResponse
from crystalwalk.services.asymptotics import summarize
from crystalwalk.utils.export import write_json


def register(subparsers) -> None:
    parser = subparsers.add_parser("asymptotics", parents=[common_options()], help="Print every closed-form limit object")
    parser.add_argument("--out", help="Also write the JSON to this file")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    response = AsymptoticsResponse.from_summary(summarize(config.to_table()))
    print(response.model_dump_json(indent=2))
    out = args.out or config.outputs.summary
    if out:
        write_json(response, out)
    return 0
