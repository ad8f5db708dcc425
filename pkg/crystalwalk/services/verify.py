"""
Verification harness: exact oracles, pathwise ledger identities and
Monte-Carlo tests of the law of large numbers and the central limit theorem

Checks never raise on a mismatch; every outcome is a VerificationReport.
"""

import dataclasses
import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.stats import chi2

from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import LatticeKind, VertexClass
from crystalwalk.models.summary import AsymptoticSummary
from crystalwalk.models.walk import BatchStatistics, CheckpointSample, WalkRecord
from crystalwalk.schemas.report import CheckStatus, Tolerance, VerificationReport
from crystalwalk.services import kernels
from crystalwalk.services.asymptotics import lln_rate_bound, summarize, summary_from_class_moments
from crystalwalk.services.lattice import vertex_classes

logger = logging.getLogger(__name__)

LLN_SAFETY = 25.0
DEGENERACY_FLOOR = 1e-10
FAULT_NOISE_FLOOR = 1e-12  # entries this small relative to the field are treated as zero
AXES = ("x", "y", "z")


def exact_check(
    check: str,
    observed,
    target,
    tolerance: Tolerance,
    absolute: bool = False,
    **meta,
) -> VerificationReport:
    """
    Compare two evaluations of the same quantity entry by entry

    The bound is exact_eps scaled by max(1, |target|_max), or exact_eps
    itself when `absolute` is set.
    """
    obs = np.atleast_1d(np.asarray(observed, dtype=float))
    tgt = np.atleast_1d(np.asarray(target, dtype=float))
    scale = float(np.abs(tgt).max()) if tgt.size else 0.0
    tol = tolerance.exact_eps if absolute else tolerance.exact_eps * max(1.0, scale)
    diff = np.abs(obs - tgt)
    residual = float(diff.max()) if diff.size else 0.0
    ok = bool(np.isfinite(residual) and residual <= tol)
    detail = None
    if not ok:
        worst = np.unravel_index(int(np.nanargmax(diff)), diff.shape)
        detail = f"worst entry {tuple(int(i) + 1 for i in worst)}"
    return VerificationReport(
        check=check,
        status=CheckStatus.PASS if ok else CheckStatus.FAIL,
        observed=observed,
        target=target,
        tolerance=tol,
        residual=residual,
        detail=detail,
        **meta,
    )


def class_mean(summary: AsymptoticSummary, vc: VertexClass) -> np.ndarray:
    """Closed-form E[xi' | class]"""
    if summary.kind is LatticeKind.ICE:
        return summary.mu + vc.epsilon * summary.theta
    return summary.mu + vc.i_sign * summary.theta + vc.j_sign * summary.m + vc.k_sign * summary.rho


def class_covariance(summary: AsymptoticSummary, vc: VertexClass) -> np.ndarray:
    """Closed-form Cov(xi' | class)"""
    if summary.kind is LatticeKind.ICE:
        return summary.sigma2 + vc.epsilon * summary.nu
    return summary.sigma2 + vc.i_sign * summary.nu + vc.j_sign * summary.gamma + vc.k_sign * summary.delta


def check_oracles(
    table: TransitionTable,
    summary: Optional[AsymptoticSummary] = None,
    tolerance: Optional[Tolerance] = None,
) -> List[VerificationReport]:
    """
    Compare brute-force kernel moments with the closed forms class by class

    Args:
        table: Transition table
        summary: Closed-form summary under test; evaluated from the table when omitted
        tolerance: Bounds; defaults apply when omitted

    Returns:
        One report per class and identity, plus one per summary coefficient
    """
    tolerance = tolerance or Tolerance()
    kernels.validate(table)
    summary = summary or summarize(table)
    p = table.p
    reports = []

    for vc in vertex_classes(table.kind):
        name = vc.label
        atoms = kernels.increment_distribution(table, vc)
        reports.append(exact_check(f"oracle.distribution[{name}]", sum(a.probability for a in atoms), 1.0, tolerance))

        brute_mean = kernels.conditional_mean(table, vc)
        closed_mean = class_mean(summary, vc)
        reports.append(exact_check(f"oracle.mean[{name}]", brute_mean, closed_mean, tolerance))
        closed_second = class_covariance(summary, vc) + np.outer(closed_mean, closed_mean)
        brute_second = kernels.conditional_second_moment(table, vc)
        reports.append(exact_check(f"oracle.second_moment[{name}]", brute_second, closed_second, tolerance))

        moments = kernels.sign_moments(table, vc)
        if table.kind is LatticeKind.ICE:
            eps = vc.epsilon
            sign_target = np.array([(2.0 * p - 1.0) * eps])
            cross_target = ((2.0 * summary.zeta - brute_mean) * eps).reshape(3, 1)
        else:
            i, j, k = vc.signs
            sign_target = np.array([-i, p - (1.0 - p) * j, (1.0 - p) * k - p * i])
            cross_target = np.column_stack(
                [
                    -i * brute_mean,
                    (1.0 + j) * summary.zeta - j * brute_mean,
                    k * brute_mean - (i + k) * summary.zeta,
                ]
            )
        reports.append(exact_check(f"oracle.sign_recursion[{name}]", moments.mean, sign_target, tolerance))
        reports.append(exact_check(f"oracle.zeta_identity[{name}]", moments.cross, cross_target, tolerance))

    reference = summary_from_class_moments(table)
    ours = summary.coefficients()
    for field, target in reference.coefficients().items():
        reports.append(exact_check(f"oracle.closed_form[{field}]", ours[field], target, tolerance))

    reports.append(_gamma_shape(summary, tolerance))
    return reports


def _gamma_shape(summary: AsymptoticSummary, tolerance: Tolerance) -> VerificationReport:
    """Symmetry and positive semidefiniteness of Gamma"""
    G = summary.Gamma
    scale = max(1.0, float(np.abs(G).max()))
    asym = float(np.abs(G - G.T).max())
    low = float(np.linalg.eigvalsh((G + G.T) / 2.0).min())
    floor = -DEGENERACY_FLOOR * scale
    ok = asym <= tolerance.exact_eps * scale and low >= floor
    status = CheckStatus.PASS if ok else CheckStatus.FAIL
    detail = f"asymmetry {asym:.3g}"
    if ok and summary.cancellation_flag:
        status = CheckStatus.FLAGGED
        detail += "; p within 1e-9 of 1, Gamma evaluated through a cancelling difference"
    return VerificationReport(
        check="oracle.gamma_psd", status=status, observed=low, target=0.0, tolerance=-floor, residual=asym, detail=detail
    )


def inject_fault(summary: AsymptoticSummary, field: str, index: Sequence[int], relative: float = 1e-3) -> AsymptoticSummary:
    """
    Copy of `summary` with one coefficient scaled by (1 + relative)

    A coefficient at rounding-noise level, zero included, is shifted by
    `relative` instead.
    """
    values = np.array(getattr(summary, field), dtype=float)
    idx = tuple(index)
    noise = FAULT_NOISE_FLOOR * max(1.0, float(np.abs(values).max()))
    values[idx] = values[idx] * (1.0 + relative) if abs(values[idx]) > noise else values[idx] + relative
    return dataclasses.replace(summary, **{field: values})


def check_ledger(
    record: WalkRecord,
    summary: AsymptoticSummary,
    tolerance: Optional[Tolerance] = None,
) -> List[VerificationReport]:
    """
    Pathwise identities between the accumulated ledger and the closed forms

    Args:
        record: Path simulated with the ledger enabled
        summary: Closed-form summary of the same table
        tolerance: Bounds; defaults apply when omitted

    Returns:
        One report per identity
    """
    tolerance = tolerance or Tolerance()
    meta = {"seed": record.seed, "n": record.steps, "replicates": 1}
    ledger = record.ledger
    if ledger is None:
        return [
            VerificationReport(
                check="ledger.recorded", status=CheckStatus.FAIL, observed="missing", target="present", tolerance=0.0, **meta
            )
        ]

    n = record.steps
    p = summary.p
    s = summary
    counters = record.counters.astype(float)
    prev = record.previous_counters.astype(float)
    N = ledger.N

    def ledger_check(check: str, observed, target) -> VerificationReport:
        return exact_check(check, observed, target, tolerance, absolute=True, **meta)

    reports = [ledger_check("ledger.decomposition", ledger.M + ledger.R, record.S)]

    if record.kind is LatticeKind.ICE:
        (I_prev,) = prev
        (I_n,) = counters
        reports += [
            ledger_check("ledger.centering", ledger.R, n * s.mu + I_prev * s.theta),
            ledger_check("ledger.bracket_M", ledger.bracket_M, n * s.sigma2 + I_prev * s.nu),
            ledger_check("ledger.bracket_N", ledger.bracket_N[0, 0], 4.0 * p * (1.0 - p) * n),
            ledger_check(
                "ledger.bracket_C",
                ledger.bracket_C[:, 0],
                -2.0 * n * p * s.theta + 2.0 * (s.zeta - p * s.mu) * I_prev,
            ),
            ledger_check("ledger.counter_identity[I]", I_n, 1.0 + N[0] + (2.0 * p - 1.0) * I_prev),
        ]
        if p == 1.0:
            reports.append(ledger_check("ledger.counter_limit[p=1]", I_n, n + 1.0))
        return reports

    I_prev, J_prev, K_prev = prev
    I_n, J_n, K_n = counters
    even = n + J_prev
    odd = I_prev + K_prev
    reports += [
        ledger_check("ledger.centering", ledger.R, n * s.mu + I_prev * s.theta + J_prev * s.m + K_prev * s.rho),
        ledger_check(
            "ledger.bracket_M",
            ledger.bracket_M,
            n * s.sigma2 + I_prev * s.nu + J_prev * s.gamma + K_prev * s.delta,
        ),
        ledger_check("ledger.bracket_NJ", ledger.bracket_N[0, 0], 2.0 * p * (1.0 - p) * even),
        ledger_check("ledger.bracket_NK", ledger.bracket_N[1, 1], 2.0 * p * (1.0 - p) * even),
        ledger_check("ledger.bracket_D", ledger.bracket_N[0, 1], -2.0 * p * (1.0 - p) * odd),
        ledger_check(
            "ledger.bracket_C",
            ledger.bracket_C[:, 0],
            (s.zeta - p * (s.mu + s.m)) * even - p * (s.theta + s.rho) * odd,
        ),
        ledger_check(
            "ledger.bracket_E",
            ledger.bracket_C[:, 1],
            (p * (s.mu + s.m) - s.zeta) * odd + p * (s.theta + s.rho) * even,
        ),
        ledger_check("ledger.parity", I_n, 1.0 if n % 2 == 0 else 0.0),
        ledger_check("ledger.counter_identity[J]", J_n, 1.0 + N[0] + n * p - (1.0 - p) * J_prev),
        ledger_check("ledger.counter_identity[K]", K_n, 1.0 + N[1] + (1.0 - p) * K_prev - p * I_prev),
    ]
    if p == 0.0:
        reports += [
            ledger_check("ledger.counter_limit[p=0,J]", J_n, I_n),
            ledger_check("ledger.counter_limit[p=0,K]", K_n, n + 1.0),
        ]
    return reports


def check_lln(
    run: Union[Sequence[CheckpointSample], BatchStatistics],
    summary: AsymptoticSummary,
    tolerance: Optional[Tolerance] = None,
    seed: Optional[int] = None,
) -> List[VerificationReport]:
    """
    Squared law-of-large-numbers error against 25 tr(Gamma) log(n)/n

    Exceedances at earlier checkpoints are flagged; only the final
    checkpoint can fail. On graphite the J_n/n counter is also tested.

    Args:
        run: Checkpoints of one long path, or a batch (one checkpoint at its n)
        summary: Closed-form summary of the walk
        tolerance: Bounds; defaults apply when omitted
        seed: Seed recorded in the reports

    Returns:
        Rate report, plus the counter report on graphite
    """
    tolerance = tolerance or Tolerance()
    replicates = 1
    if isinstance(run, BatchStatistics):
        replicates = run.replicates
        seed = run.seed if seed is None else seed
        samples = [CheckpointSample(n=run.n, S=run.mean_S, counters=run.counter_means * run.n)]
    else:
        samples = sorted(run, key=lambda c: c.n)

    granularity = 2.0 * max(summary.geometry.a, summary.geometry.h)
    trace = float(np.trace(summary.Gamma))
    exceeded = []
    final = samples[-1]
    for sample in samples:
        bound = LLN_SAFETY * trace * lln_rate_bound(sample.n) + (granularity / sample.n) ** 2
        err2 = float(np.sum((sample.S / sample.n - summary.lln_limit) ** 2))
        if err2 > bound and sample is not final:
            exceeded.append(sample.n)
    final_bound = LLN_SAFETY * trace * lln_rate_bound(final.n) + (granularity / final.n) ** 2
    final_err2 = float(np.sum((final.S / final.n - summary.lln_limit) ** 2))

    if final_err2 > final_bound:
        status = CheckStatus.FAIL
    elif exceeded:
        status = CheckStatus.FLAGGED
        logger.warning(f"LLN envelope exceeded at checkpoints {exceeded}")
    else:
        status = CheckStatus.PASS
    meta = {"seed": seed, "n": final.n, "replicates": replicates}
    reports = [
        VerificationReport(
            check="lln.rate",
            status=status,
            observed=final_err2,
            target=0.0,
            tolerance=final_bound,
            residual=final_err2,
            detail=f"checkpoints {[s.n for s in samples]}; exceeded at {exceeded}" if exceeded else None,
            **meta,
        )
    ]

    if summary.kind is LatticeKind.GRAPHITE:
        p, n = summary.p, final.n
        target = float(summary.counter_limits[1])
        spread = math.sqrt(4.0 * p * (1.0 - p) / (2.0 - p) ** 3)
        tol = tolerance.stat_z * spread / math.sqrt(n) + 2.0 / ((2.0 - p) * n)
        observed = float(final.counters[1]) / n
        reports.append(
            VerificationReport(
                check="lln.counter_J",
                status=CheckStatus.PASS if abs(observed - target) <= tol else CheckStatus.FAIL,
                observed=observed,
                target=target,
                tolerance=tol,
                residual=abs(observed - target),
                **meta,
            )
        )
    return reports


def _projection_vectors(seed: int) -> List[tuple]:
    vectors = [(axis, np.eye(3)[d]) for d, axis in enumerate(AXES)]
    generator = np.random.Generator(np.random.Philox(seed))
    for label in ("u1", "u2"):
        v = generator.standard_normal(3)
        vectors.append((label, v / np.linalg.norm(v)))
    return vectors


def check_clt(
    batch: BatchStatistics,
    summary: AsymptoticSummary,
    tolerance: Optional[Tolerance] = None,
) -> List[VerificationReport]:
    """
    Empirical covariance, shape moments and projections of S_n / sqrt(n) against Gamma

    Args:
        batch: Batch of independent replicates
        summary: Closed-form summary of the walk
        tolerance: Bounds; defaults apply when omitted

    Returns:
        Reports for covariance entries, skewness and kurtosis of non-degenerate
        coordinates, five projections and the Mahalanobis distance of the mean
    """
    tolerance = tolerance or Tolerance()
    R = batch.replicates
    G = summary.Gamma
    C = batch.cov_scaled
    z = tolerance.stat_z
    floor = 2e-3 * max(1.0, float(np.abs(G).max()))
    meta = {"seed": batch.seed, "n": batch.n, "replicates": R}
    reports = []

    def bounded(check: str, observed: float, target: float, tol: float) -> VerificationReport:
        residual = abs(observed - target)
        ok = math.isfinite(observed) and residual <= tol
        return VerificationReport(
            check=check,
            status=CheckStatus.PASS if ok else CheckStatus.FAIL,
            observed=observed,
            target=target,
            tolerance=tol,
            residual=residual if math.isfinite(residual) else None,
            **meta,
        )

    for r in range(3):
        for c in range(r, 3):
            se = math.sqrt((G[r, r] * G[c, c] + G[r, c] ** 2) / R)
            tol = max(tolerance.cov_rel * abs(G[r, c]), floor, z * se)
            reports.append(bounded(f"clt.covariance[{AXES[r]}{AXES[c]}]", float(C[r, c]), float(G[r, c]), tol))

    for d, axis in enumerate(AXES):
        if G[d, d] < DEGENERACY_FLOOR:
            logger.debug(f"coordinate {axis} is degenerate, shape moments skipped")
            continue
        skew_tol = max(tolerance.moment_abs, z * math.sqrt(6.0 / R))
        kurt_tol = max(tolerance.moment_abs, z * math.sqrt(24.0 / R))
        reports.append(bounded(f"clt.skewness[{axis}]", float(batch.skewness[d]), 0.0, skew_tol))
        reports.append(bounded(f"clt.kurtosis[{axis}]", float(batch.kurtosis[d]), 3.0, kurt_tol))

    for label, u in _projection_vectors(batch.seed):
        target = float(u @ G @ u)
        tol = max(tolerance.cov_rel * target, floor, z * math.sqrt(2.0 / R) * target)
        reports.append(bounded(f"clt.projection[{label}]", float(u @ C @ u), target, tol))

    reports.extend(_mean_distance(batch, summary, tolerance, meta))
    return reports


def _mean_distance(batch: BatchStatistics, summary: AsymptoticSummary, tolerance: Tolerance, meta: dict):
    """Mahalanobis distance of the batch mean over the non-degenerate eigenspace of Gamma; informational"""
    w, V = np.linalg.eigh(summary.Gamma)
    keep = w > DEGENERACY_FLOOR
    dof = int(keep.sum())
    if dof == 0:
        return []
    t_bar = (batch.mean_S - batch.n * summary.lln_limit) / math.sqrt(batch.n)
    coords = V[:, keep].T @ t_bar
    distance = float(batch.replicates * np.sum(coords**2 / w[keep]))
    threshold = float(chi2.isf(tolerance.false_alarm, dof))
    return [
        VerificationReport(
            check="clt.mean_mahalanobis",
            status=CheckStatus.PASS if distance <= threshold else CheckStatus.FLAGGED,
            observed=distance,
            target=float(dof),
            tolerance=threshold,
            detail="informational: finite-n drift bias can move the mean",
            **meta,
        )
    ]
