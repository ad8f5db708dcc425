"""
`verify` subcommand
"""

import argparse
import logging
from typing import Dict, List, Optional

from crystalwalk.cli.deps import build_document, common_options, load_config, parse_tolerance, print_outcome
from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.walk import RngSpec
from crystalwalk.schemas.report import Tolerance, VerificationReport
from crystalwalk.services import verify
from crystalwalk.services.asymptotics import summarize
from crystalwalk.services.walker import run_batch, sample_checkpoints, simulate
from crystalwalk.utils.export import write_json

logger = logging.getLogger(__name__)

SUITES = ("oracles", "ledger", "lln", "clt", "all")
DEFAULT_LLN_STEPS = 1 << 22
DEFAULT_LEDGER_PATHS = 100


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", parents=[common_options()], help="Run verification checks")
    parser.add_argument("suite", choices=SUITES)
    parser.add_argument("--steps", type=int, help="Steps per path for ledger and CLT checks")
    parser.add_argument("--replicates", type=int, help="Replicates of the CLT batch")
    parser.add_argument("--lln-steps", type=int, default=DEFAULT_LLN_STEPS, help="Length of the LLN path (default 2^22)")
    parser.add_argument("--ledger-paths", type=int, default=DEFAULT_LEDGER_PATHS, help="Paths for ledger checks")
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE", help="Override a tolerance, e.g. stat_z=5")
    parser.add_argument("--out", help="Write the JSON report here")
    parser.set_defaults(func=run)


def dyadic_checkpoints(total: int, start: int = 16) -> List[int]:
    marks = []
    n = start
    while n < total:
        marks.append(n)
        n *= 2
    marks.append(total)
    return marks


def worst_per_check(reports: List[VerificationReport], paths: int) -> List[VerificationReport]:
    """Keep one report per check name: a failure if any, else the largest residual"""
    chosen: Dict[str, VerificationReport] = {}
    for report in reports:
        best = chosen.get(report.check)
        if best is None:
            chosen[report.check] = report
            continue
        rank = (report.failed, report.residual or 0.0)
        if rank > (best.failed, best.residual or 0.0):
            chosen[report.check] = report
    return [r.model_copy(update={"replicates": paths}) for r in chosen.values()]


def run_suite(
    table: TransitionTable,
    suite: str,
    steps: int,
    replicates: int,
    seed: int,
    tolerance: Optional[Tolerance] = None,
    threads: Optional[int] = None,
    lln_steps: int = DEFAULT_LLN_STEPS,
    ledger_paths: int = DEFAULT_LEDGER_PATHS,
) -> List[VerificationReport]:
    """Run one suite (or all) against a table"""
    tolerance = tolerance or Tolerance()
    summary = summarize(table)
    reports: List[VerificationReport] = []
    base = RngSpec(seed=seed)

    if suite in ("oracles", "all"):
        reports += verify.check_oracles(table, summary, tolerance)
    if suite in ("ledger", "all"):
        logger.info(f"ledger: {ledger_paths} paths x {steps} steps")
        collected = []
        for stream in range(ledger_paths):
            record = simulate(table, steps, base.stream(stream))
            collected += verify.check_ledger(record, summary, tolerance)
        reports += worst_per_check(collected, ledger_paths)
    if suite in ("lln", "all"):
        logger.info(f"lln: one path of {lln_steps} steps")
        samples = sample_checkpoints(table, dyadic_checkpoints(lln_steps), base)
        reports += verify.check_lln(samples, summary, tolerance, seed=seed)
    if suite in ("clt", "all"):
        batch = run_batch(table, steps, replicates, base, threads=threads)
        reports += verify.check_clt(batch, summary, tolerance)
    return reports


def run(args: argparse.Namespace) -> int:
    config = load_config(args, steps=args.steps, replicates=args.replicates)
    tolerance = parse_tolerance(args.tol)
    table = config.to_table()
    reports = run_suite(
        table,
        args.suite,
        steps=config.steps,
        replicates=config.replicates,
        seed=config.seed,
        tolerance=tolerance,
        threads=args.threads,
        lln_steps=args.lln_steps,
        ledger_paths=args.ledger_paths,
    )
    document = build_document(reports, config.lattice.value, config.seed)
    out = args.out or config.outputs.report
    if out:
        write_json(document, out)
    print_outcome(document)
    return 1 if document.failed else 0
