"""
`selftest` subcommand: built-in symmetric and degenerate reference cases
"""

import argparse
import logging
from typing import List

import numpy as np

from crystalwalk.cli.deps import build_document, common_options, print_outcome
from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import LatticeKind
from crystalwalk.models.walk import RngSpec, WalkMode
from crystalwalk.schemas.report import CheckStatus, Tolerance, VerificationReport
from crystalwalk.services import verify
from crystalwalk.services.asymptotics import summarize
from crystalwalk.services.kernels import random_table
from crystalwalk.services.lattice import position
from crystalwalk.services.walker import simulate, trajectory_states
from crystalwalk.utils.export import write_json

logger = logging.getLogger(__name__)

SELFTEST_SEED = 20_240_601
FUZZ_TABLES = 1000
LEDGER_PATHS = 5
LEDGER_STEPS = 10_000


def register(subparsers) -> None:
    parser = subparsers.add_parser("selftest", parents=[common_options()], help="Run the built-in reference cases")
    parser.add_argument("--fuzz-tables", type=int, default=FUZZ_TABLES, help="Random tables per lattice for oracle fuzzing")
    parser.add_argument("--out", help="Write the JSON report here")
    parser.set_defaults(func=run)


def _prefixed(prefix: str, reports: List[VerificationReport]) -> List[VerificationReport]:
    return [r.model_copy(update={"check": f"{prefix}.{r.check}"}) for r in reports]


def zigzag_table() -> TransitionTable:
    """p = 0 with every step along H0: a two-point orbit"""
    return TransitionTable(kind=LatticeKind.ICE, p=0.0, alpha=0.5, horizontal=[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])


def reference_cases(tolerance: Tolerance, seed: int, fuzz_tables: int) -> List[VerificationReport]:
    reports: List[VerificationReport] = []
    ice = TransitionTable.symmetric(LatticeKind.ICE)
    graphite = TransitionTable.symmetric(LatticeKind.GRAPHITE)
    targets = {
        "ice": (ice, np.diag([0.4, 0.4, 0.2])),
        "graphite": (graphite, np.diag([4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0])),
    }
    for name, (table, gamma) in targets.items():
        summary = summarize(table)
        reports.append(verify.exact_check(f"selftest.{name}.gamma", summary.Gamma, gamma, tolerance))
        reports += _prefixed(f"selftest.{name}", verify.check_oracles(table, summary, tolerance))
        for stream in range(LEDGER_PATHS):
            record = simulate(table, LEDGER_STEPS, RngSpec(seed=seed, stream_id=stream))
            reports += _prefixed(f"selftest.{name}.path{stream}", verify.check_ledger(record, summary, tolerance))

    zigzag = zigzag_table()
    summary = summarize(zigzag)
    reports.append(verify.exact_check("selftest.zigzag.gamma", summary.Gamma, np.zeros((3, 3)), tolerance))
    record = simulate(zigzag, 101, RngSpec(seed=seed), mode=WalkMode.TRAJECTORY)
    points = np.array([position(s, zigzag.geometry, zigzag.kind) for s in trajectory_states(record)])
    expected = np.array([[0.0, 0.0, 0.0] if k % 2 == 0 else [1.0, 0.0, 0.0] for k in range(len(points))])
    reports.append(verify.exact_check("selftest.zigzag.orbit", points, expected, tolerance))

    vertical = TransitionTable(kind=LatticeKind.ICE, p=1.0, alpha=0.5, horizontal=[[0.0] * 3, [0.0] * 3])
    reports.append(verify.exact_check("selftest.ice_p1.gamma", summarize(vertical).Gamma, np.diag([0.0, 0.0, 1.0]), tolerance))

    rng = np.random.Generator(np.random.Philox(seed))
    flat = random_table(LatticeKind.ICE, rng, p=0.0)
    rows = np.asarray(flat.horizontal)
    # graphite p = 0 only visits V00 and V11: reuse the ice rows there
    stacked = [[rows[0].tolist(), rows[0].tolist()], [rows[1].tolist(), rows[1].tolist()]]
    twin = TransitionTable(kind=LatticeKind.GRAPHITE, p=0.0, alpha=flat.alpha, horizontal=stacked, geometry=flat.geometry)
    ice_sum, graphite_sum = summarize(flat), summarize(twin)
    reports.append(verify.exact_check("selftest.p0_twin.lln_limit", graphite_sum.lln_limit, ice_sum.lln_limit, tolerance))
    reports.append(verify.exact_check("selftest.p0_twin.gamma", graphite_sum.Gamma, ice_sum.Gamma, tolerance))

    for kind in LatticeKind:
        failures = 0
        for _ in range(fuzz_tables):
            table = random_table(kind, rng)
            if any(r.failed for r in verify.check_oracles(table, tolerance=tolerance)):
                failures += 1
        reports.append(
            VerificationReport(
                check=f"selftest.fuzz[{kind.value}]",
                status=CheckStatus.PASS if failures == 0 else CheckStatus.FAIL,
                observed=failures,
                target=0,
                tolerance=0.0,
                replicates=fuzz_tables,
                seed=seed,
            )
        )
    return reports


def run(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else SELFTEST_SEED
    document = build_document(reference_cases(Tolerance(), seed, args.fuzz_tables), "ice+graphite", seed)
    if args.out:
        write_json(document, args.out)
    print_outcome(document)
    return 1 if document.failed else 0
