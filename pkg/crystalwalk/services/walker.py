"""
Seeded sampling of walks with streaming counters and martingale ledger

The hot loop runs in numba over per-class lookup tables compiled once per
transition table. Uniforms come from the replicate's Philox stream in
chunks, so a path only depends on (seed, stream_id) and never on chunking
or thread layout.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from crystalwalk.core.config import settings
from crystalwalk.core.errors import DomainError
from crystalwalk.models.kernel import IncrementAtom, TransitionTable
from crystalwalk.models.lattice import LatticeKind, LatticeState, MoveLabel
from crystalwalk.models.walk import BatchStatistics, CheckpointSample, MartingaleLedger, RngSpec, WalkMode, WalkRecord
from crystalwalk.services import kernels
from crystalwalk.services.lattice import apply_move, position, vertex_classes
from crystalwalk.utils.accumulators import KahanSum, MomentAccumulator, merge_pairwise
from crystalwalk.utils.rng import make_generator, uniform_chunks

logger = logging.getLogger(__name__)

ATOMS = len(MoveLabel)
INDEX_LIMIT = 1 << 62


class KernelTables(NamedTuple):
    """Per-class lookup arrays consumed by the numba loop"""

    kind: LatticeKind
    cum_prob: np.ndarray  # (C, 5) cumulative atom probabilities, order Up, Down, H0, H1, H2
    last_atom: np.ndarray  # (C,) last atom with positive probability
    next_cls: np.ndarray  # (C, 5)
    cell_delta: np.ndarray  # (C, 5, 3) change of (cell_k, cell_l, sheet_n)
    disp: np.ndarray  # (C, 5, 3)
    signs: np.ndarray  # (C, 3) class signs, zero padded on ice
    tracked: np.ndarray  # indices into signs of the sign martingales
    cond_mean: np.ndarray  # (C, 3)
    cond_cov: np.ndarray  # (C, 3, 3)
    sign_mean: np.ndarray  # (C, T)
    sign_cov: np.ndarray  # (C, T, T)
    cross_cov: np.ndarray  # (C, 3, T)

    @property
    def sign_count(self) -> int:
        return 1 if self.kind is LatticeKind.ICE else 3

    @property
    def ledger_size(self) -> int:
        t = self.tracked.shape[0]
        return 6 + t + 9 + t * t + 3 * t


@lru_cache(maxsize=32)
def compile_tables(table: TransitionTable) -> KernelTables:
    """
    Flatten the kernel of a validated table into per-class arrays

    Cell deltas are taken from `apply_move`, displacements and moments from
    the kernels module, so the loop reproduces both exactly.
    """
    kind = table.kind
    classes = vertex_classes(kind)
    count = len(classes)
    tracked = np.array([0] if kind is LatticeKind.ICE else [1, 2], dtype=np.int64)
    t = tracked.shape[0]

    probs = np.zeros((count, ATOMS))
    last_atom = np.zeros(count, dtype=np.int64)
    next_cls = np.full((count, ATOMS), -1, dtype=np.int64)
    cell_delta = np.zeros((count, ATOMS, 3), dtype=np.int64)
    disp = np.zeros((count, ATOMS, 3))
    signs = np.zeros((count, 3), dtype=np.int64)
    cond_mean = np.zeros((count, 3))
    cond_cov = np.zeros((count, 3, 3))
    sign_mean = np.zeros((count, t))
    sign_cov = np.zeros((count, t, t))
    cross_cov = np.zeros((count, 3, t))

    for c, vc in enumerate(classes):
        here = LatticeState(vertex_class=vc)
        signs[c, : len(vc.signs)] = vc.signs
        for atom in kernels.increment_distribution(table, vc):
            q = int(atom.move)
            there = apply_move(here, atom.move, kind)
            probs[c, q] = atom.probability
            next_cls[c, q] = atom.class_after.index
            cell_delta[c, q] = (there.cell_k, there.cell_l, there.sheet_n)
            disp[c, q] = atom.displacement
            last_atom[c] = q
        cond_mean[c] = kernels.conditional_mean(table, vc)
        cond_cov[c] = kernels.conditional_covariance(table, vc)
        moments = kernels.sign_moments(table, vc)
        sign_mean[c] = moments.mean[tracked]
        sign_cov[c] = moments.covariance[np.ix_(tracked, tracked)]
        cross_cov[c] = (moments.cross - np.outer(cond_mean[c], moments.mean))[:, tracked]

    return KernelTables(
        kind=kind,
        cum_prob=np.cumsum(probs, axis=1),
        last_atom=last_atom,
        next_cls=next_cls,
        cell_delta=cell_delta,
        disp=disp,
        signs=signs,
        tracked=tracked,
        cond_mean=cond_mean,
        cond_cov=cond_cov,
        sign_mean=sign_mean,
        sign_cov=sign_cov,
        cross_cov=cross_cov,
    )


@njit(nogil=True, cache=True)
def _kahan(acc, carry, idx, value):
    y = value - carry[idx]
    total = acc[idx] + y
    carry[idx] = (total - acc[idx]) - y
    acc[idx] = total


@njit(nogil=True, cache=True)
def _advance(
    uniforms,
    cursor,
    counters,
    acc,
    carry,
    cum_prob,
    last_atom,
    next_cls,
    cell_delta,
    disp,
    signs,
    tracked,
    cond_mean,
    cond_cov,
    sign_mean,
    sign_cov,
    cross_cov,
    with_ledger,
    trajectory,
    row0,
):
    # cursor = (cell_k, cell_l, sheet_n, class); ledger layout in acc:
    # M[0:3] R[3:6] N[6:6+T] <M>[9 entries] <N>[T*T] <M,N>[3*T]
    t_count = tracked.shape[0]
    keep = trajectory.shape[0] > 0
    for step in range(uniforms.shape[0]):
        c = cursor[3]
        u = uniforms[step]
        atom = last_atom[c]
        for q in range(5):
            if u < cum_prob[c, q]:
                atom = q
                break
        nc = next_cls[c, atom]
        for d in range(3):
            cursor[d] += cell_delta[c, atom, d]
        cursor[3] = nc
        for d in range(3):
            counters[d] += signs[nc, d]

        if with_ledger:
            for d in range(3):
                _kahan(acc, carry, d, disp[c, atom, d] - cond_mean[c, d])
                _kahan(acc, carry, 3 + d, cond_mean[c, d])
            base = 6
            for q in range(t_count):
                _kahan(acc, carry, base + q, signs[nc, tracked[q]] - sign_mean[c, q])
            base += t_count
            for r in range(3):
                for s in range(3):
                    _kahan(acc, carry, base + 3 * r + s, cond_cov[c, r, s])
            base += 9
            for q in range(t_count):
                for r in range(t_count):
                    _kahan(acc, carry, base + t_count * q + r, sign_cov[c, q, r])
            base += t_count * t_count
            for d in range(3):
                for q in range(t_count):
                    _kahan(acc, carry, base + t_count * d + q, cross_cov[c, d, q])

        if keep:
            for d in range(4):
                trajectory[row0 + step, d] = cursor[d]


class _PathState:
    """Mutable buffers of one path in flight"""

    def __init__(self, tables: KernelTables, with_ledger: bool, keep_rows: int = 0):
        self.tables = tables
        self.with_ledger = with_ledger
        self.cursor = np.zeros(4, dtype=np.int64)
        self.counters = tables.signs[0].copy()
        size = tables.ledger_size if with_ledger else 1
        self.acc = np.zeros(size)
        self.carry = np.zeros(size)
        self.trajectory = np.zeros((keep_rows, 4), dtype=np.int64)
        self.steps = 0

    def advance(self, uniforms: np.ndarray) -> None:
        tb = self.tables
        _advance(
            uniforms,
            self.cursor,
            self.counters,
            self.acc,
            self.carry,
            tb.cum_prob,
            tb.last_atom,
            tb.next_cls,
            tb.cell_delta,
            tb.disp,
            tb.signs,
            tb.tracked,
            tb.cond_mean,
            tb.cond_cov,
            tb.sign_mean,
            tb.sign_cov,
            tb.cross_cov,
            self.with_ledger,
            self.trajectory,
            1 + self.steps,
        )
        self.steps += uniforms.shape[0]
        if np.abs(self.cursor[:3]).max() >= INDEX_LIMIT:
            raise DomainError(f"lattice index overflow after {self.steps} steps")

    def state(self) -> LatticeState:
        return _state_from_row(self.cursor, self.tables.kind)

    def ledger(self) -> MartingaleLedger:
        t = self.tables.tracked.shape[0]
        acc = self.acc
        base = 6 + t
        return MartingaleLedger(
            kind=self.tables.kind,
            M=acc[0:3].copy(),
            R=acc[3:6].copy(),
            N=acc[6:base].copy(),
            bracket_M=acc[base : base + 9].reshape(3, 3).copy(),
            bracket_N=acc[base + 9 : base + 9 + t * t].reshape(t, t).copy(),
            bracket_C=acc[base + 9 + t * t :].reshape(3, t).copy(),
        )


def _state_from_row(row: Sequence[int], kind: LatticeKind) -> LatticeState:
    k, l, n, c = (int(x) for x in row[:4])
    return LatticeState(cell_k=k, cell_l=l, sheet_n=n, vertex_class=vertex_classes(kind)[c])


def step(state: LatticeState, table: TransitionTable, rng: np.random.Generator) -> Tuple[LatticeState, IncrementAtom]:
    """
    Sample one move by inverse CDF over the atoms of the current class

    Args:
        state: Current state
        table: Validated table
        rng: Uniform source; one draw per step

    Returns:
        New state and the chosen atom
    """
    atoms = kernels.increment_distribution(table, state.vertex_class)
    u = rng.random()
    chosen = atoms[-1]
    total = 0.0
    for atom in atoms:
        total += atom.probability
        if u < total:
            chosen = atom
            break
    return apply_move(state, chosen.move, table.kind), chosen


def simulate(
    table: TransitionTable,
    n: int,
    rng: RngSpec,
    mode: WalkMode = WalkMode.SUMMARY,
    ledger: bool = True,
) -> WalkRecord:
    """
    Run one path of n steps from the origin

    Args:
        table: Transition table, validated here
        n: Number of steps
        rng: Seed and stream of the path
        mode: Keep every state (trajectory) or only the final one (summary)
        ledger: Accumulate the martingale ledger

    Returns:
        WalkRecord of the path

    Raises:
        DomainError: Negative n, trajectory above TRAJECTORY_CAP, index overflow
    """
    if n < 0:
        raise DomainError(f"number of steps must be >= 0, got {n}")
    kernels.validate(table)
    keep_rows = 0
    if mode is WalkMode.TRAJECTORY:
        if n + 1 > settings.TRAJECTORY_CAP:
            raise DomainError(f"trajectory of {n + 1} states exceeds TRAJECTORY_CAP={settings.TRAJECTORY_CAP}")
        keep_rows = n + 1

    tables = compile_tables(table)
    path = _PathState(tables, ledger, keep_rows)
    generator = make_generator(rng)
    logger.debug(f"simulate {table.kind.value} n={n} seed={rng.seed} stream={rng.stream_id}")
    for chunk in uniform_chunks(generator, n, settings.RNG_CHUNK_SIZE):
        path.advance(chunk)

    state = path.state()
    return WalkRecord(
        kind=table.kind,
        steps=n,
        state=state,
        S=position(state, table.geometry, table.kind),
        counters=path.counters[: tables.sign_count].copy(),
        seed=rng.seed,
        stream_id=rng.stream_id,
        ledger=path.ledger() if ledger else None,
        trajectory=path.trajectory if keep_rows else None,
    )


def replay(table: TransitionTable, n: int, rng: RngSpec) -> WalkRecord:
    """
    Pure-Python path built from `step`, with the ledger kept in KahanSum objects

    Consumes the stream exactly like `simulate`, so both give the same path.
    """
    kernels.validate(table)
    kind = table.kind
    tracked = [0] if kind is LatticeKind.ICE else [1, 2]
    generator = make_generator(rng)
    state = LatticeState(vertex_class=vertex_classes(kind)[0])
    counters = np.array(state.vertex_class.signs, dtype=np.int64)
    sums = {
        "M": KahanSum(3),
        "R": KahanSum(3),
        "N": KahanSum(len(tracked)),
        "bM": KahanSum((3, 3)),
        "bN": KahanSum((len(tracked), len(tracked))),
        "bC": KahanSum((3, len(tracked))),
    }
    for _ in range(n):
        vc = state.vertex_class
        mean = kernels.conditional_mean(table, vc)
        moments = kernels.sign_moments(table, vc)
        state, atom = step(state, table, generator)
        new_signs = np.array(state.vertex_class.signs, dtype=float)
        counters += np.array(state.vertex_class.signs, dtype=np.int64)
        sums["M"].add(atom.displacement - mean)
        sums["R"].add(mean)
        sums["N"].add(new_signs[tracked] - moments.mean[tracked])
        sums["bM"].add(kernels.conditional_covariance(table, vc))
        sums["bN"].add(moments.covariance[np.ix_(tracked, tracked)])
        sums["bC"].add((moments.cross - np.outer(mean, moments.mean))[:, tracked])

    ledger = MartingaleLedger(
        kind=kind,
        M=sums["M"].value,
        R=sums["R"].value,
        N=sums["N"].value,
        bracket_M=sums["bM"].value,
        bracket_N=sums["bN"].value,
        bracket_C=sums["bC"].value,
    )
    return WalkRecord(
        kind=kind,
        steps=n,
        state=state,
        S=position(state, table.geometry, kind),
        counters=counters,
        seed=rng.seed,
        stream_id=rng.stream_id,
        ledger=ledger,
    )


def trajectory_states(record: WalkRecord) -> Iterator[LatticeState]:
    """States of a trajectory-mode record, origin first"""
    if record.trajectory is None:
        return
    for row in record.trajectory:
        yield _state_from_row(row, record.kind)


def sample_checkpoints(table: TransitionTable, checkpoints: Sequence[int], rng: RngSpec) -> List[CheckpointSample]:
    """
    Follow one long path and record S_n and the counters at each checkpoint

    The path is the one `simulate` produces for the same stream.
    """
    kernels.validate(table)
    marks = sorted(set(int(c) for c in checkpoints))
    if not marks or marks[0] < 0:
        raise DomainError(f"checkpoints must be non-negative, got {list(checkpoints)}")
    tables = compile_tables(table)
    path = _PathState(tables, with_ledger=False)
    generator = make_generator(rng)
    samples = []
    for mark in marks:
        for chunk in uniform_chunks(generator, mark - path.steps, settings.RNG_CHUNK_SIZE):
            path.advance(chunk)
        state = path.state()
        samples.append(
            CheckpointSample(
                n=mark,
                S=position(state, table.geometry, table.kind),
                counters=path.counters[: tables.sign_count].copy(),
            )
        )
        logger.debug(f"checkpoint n={mark} reached")
    return samples


def _run_block(
    table: TransitionTable, tables: KernelTables, n: int, base: RngSpec, start: int, stop: int
) -> Tuple[MomentAccumulator, MomentAccumulator]:
    finals = np.empty((stop - start, 3))
    counts = np.empty((stop - start, tables.sign_count))
    for r in range(start, stop):
        path = _PathState(tables, with_ledger=False)
        generator = make_generator(base.stream(r))
        for chunk in uniform_chunks(generator, n, settings.RNG_CHUNK_SIZE):
            path.advance(chunk)
        finals[r - start] = position(path.state(), table.geometry, table.kind)
        counts[r - start] = path.counters[: tables.sign_count]
    logger.debug(f"block [{start}, {stop}) done")
    return MomentAccumulator.from_samples(finals), MomentAccumulator.from_samples(counts)


def run_batch(
    table: TransitionTable,
    n: int,
    replicates: int,
    base_rng: RngSpec,
    threads: Optional[int] = None,
) -> BatchStatistics:
    """
    Moments of S_n over independent replicates with stream ids 0..replicates-1

    Replicates are cut into fixed blocks of BATCH_BLOCK_SIZE; block
    accumulators merge along a fixed pairwise tree, so the result is the
    same for every thread count.

    Raises:
        DomainError: If replicates < 2 or n < 1
    """
    if replicates < 2:
        raise DomainError(f"run_batch needs at least 2 replicates, got {replicates}")
    if n < 1:
        raise DomainError(f"run_batch needs n >= 1, got {n}")
    kernels.validate(table)
    tables = compile_tables(table)
    workers = threads or settings.threads
    block = max(1, settings.BATCH_BLOCK_SIZE)
    bounds = [(start, min(start + block, replicates)) for start in range(0, replicates, block)]

    # compile the loop before workers race for it
    _PathState(tables, with_ledger=False).advance(np.zeros(0))

    logger.info(f"batch {table.kind.value}: {replicates} replicates x {n} steps on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda b: _run_block(table, tables, n, base_rng, *b), bounds))

    positions = merge_pairwise([p[0] for p in parts])
    counters = merge_pairwise([p[1] for p in parts])
    logger.info(f"batch {table.kind.value} finished")
    return BatchStatistics(
        kind=table.kind,
        replicates=replicates,
        n=n,
        seed=base_rng.seed,
        mean_S=positions.mean,
        cov_scaled=positions.covariance / n,
        skewness=positions.skewness,
        kurtosis=positions.kurtosis,
        counter_means=counters.mean / n,
    )
