"""
Tests for path sampling, the martingale ledger and batch statistics
"""

import numpy as np
import pytest

from crystalwalk.core.config import settings
from crystalwalk.core.errors import DomainError
from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import GeometryParams, LatticeKind
from crystalwalk.models.walk import WalkMode
from crystalwalk.services.lattice import admissible_moves, apply_move, origin, position
from crystalwalk.services.walker import (
    replay,
    run_batch,
    sample_checkpoints,
    simulate,
    step,
    trajectory_states,
)
from crystalwalk.utils.rng import make_generator, uniform_chunks


class TestStreams:
    def test_chunking_does_not_change_values(self, rng_spec):
        whole = make_generator(rng_spec).random(1000)
        chunked = np.concatenate(list(uniform_chunks(make_generator(rng_spec), 1000, 64)))
        assert np.array_equal(whole, chunked)

    def test_streams_differ(self, rng_spec):
        a = make_generator(rng_spec.stream(0)).random(8)
        b = make_generator(rng_spec.stream(1)).random(8)
        assert not np.array_equal(a, b)


class TestSimulate:
    def test_zero_steps(self, ice_table, rng_spec):
        record = simulate(ice_table, 0, rng_spec)
        assert record.state == origin(LatticeKind.ICE)
        assert np.allclose(record.S, 0.0)
        assert np.array_equal(record.counters, [1])
        assert np.allclose(record.ledger.M, 0.0)

    def test_negative_steps(self, ice_table, rng_spec):
        with pytest.raises(DomainError):
            simulate(ice_table, -1, rng_spec)

    def test_deterministic(self, skewed_graphite_table, rng_spec):
        first = simulate(skewed_graphite_table, 5000, rng_spec)
        second = simulate(skewed_graphite_table, 5000, rng_spec)
        assert first.state == second.state
        assert np.array_equal(first.counters, second.counters)
        assert np.array_equal(first.ledger.M, second.ledger.M)

    def test_chunk_size_does_not_change_path(self, skewed_ice_table, rng_spec, monkeypatch):
        reference = simulate(skewed_ice_table, 3000, rng_spec)
        monkeypatch.setattr(settings, "RNG_CHUNK_SIZE", 7)
        chunked = simulate(skewed_ice_table, 3000, rng_spec)
        assert chunked.state == reference.state
        assert np.allclose(chunked.ledger.bracket_M, reference.ledger.bracket_M, rtol=0, atol=1e-9)

    @pytest.mark.parametrize("table_name", ["skewed_ice_table", "skewed_graphite_table"])
    def test_matches_python_replay(self, table_name, request, rng_spec):
        table = request.getfixturevalue(table_name)
        fast = simulate(table, 2000, rng_spec.stream(3))
        slow = replay(table, 2000, rng_spec.stream(3))
        assert fast.state == slow.state
        assert np.array_equal(fast.counters, slow.counters)
        for field in ("M", "R", "N", "bracket_M", "bracket_N", "bracket_C"):
            assert np.allclose(getattr(fast.ledger, field), getattr(slow.ledger, field), atol=1e-9), field

    def test_position_follows_state(self, skewed_graphite_table, rng_spec):
        record = simulate(skewed_graphite_table, 1000, rng_spec)
        assert np.allclose(record.S, position(record.state, skewed_graphite_table.geometry, LatticeKind.GRAPHITE))

    def test_summary_mode_without_ledger(self, ice_table, rng_spec):
        record = simulate(ice_table, 100, rng_spec, ledger=False)
        assert record.ledger is None
        assert record.trajectory is None


class TestTrajectory:
    def test_consecutive_states_are_neighbors(self, skewed_graphite_table, rng_spec):
        kind = LatticeKind.GRAPHITE
        record = simulate(skewed_graphite_table, 500, rng_spec, mode=WalkMode.TRAJECTORY)
        states = list(trajectory_states(record))
        assert len(states) == 501
        assert states[0] == origin(kind)
        assert states[-1] == record.state
        for before, after in zip(states, states[1:]):
            reachable = {apply_move(before, move, kind) for move in admissible_moves(before.vertex_class, kind)}
            assert after in reachable

    def test_zigzag_stays_bounded(self, rng_spec):
        table = TransitionTable(kind=LatticeKind.ICE, p=0.0, alpha=0.5, horizontal=[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        record = simulate(table, 99, rng_spec, mode=WalkMode.TRAJECTORY)
        xs = [position(s, table.geometry, LatticeKind.ICE)[0] for s in trajectory_states(record)]
        assert xs == [float(k % 2) for k in range(100)]

    def test_trajectory_cap(self, ice_table, rng_spec, monkeypatch):
        monkeypatch.setattr(settings, "TRAJECTORY_CAP", 10)
        with pytest.raises(DomainError):
            simulate(ice_table, 10, rng_spec, mode=WalkMode.TRAJECTORY)


class TestSpecialPaths:
    def test_ice_all_vertical(self, rng_spec):
        table = TransitionTable(kind=LatticeKind.ICE, p=1.0, alpha=0.5, horizontal=[[0.0] * 3, [0.0] * 3])
        record = simulate(table, 400, rng_spec)
        assert np.allclose(record.S[:2], 0.0)
        assert record.counters[0] == 401

    def test_graphite_parity(self, skewed_graphite_table, rng_spec):
        for n in (1, 2, 777, 1000):
            record = simulate(skewed_graphite_table, n, rng_spec)
            assert record.counters[0] == (1 if n % 2 == 0 else 0)

    def test_graphite_no_jumps(self, rng_spec):
        table = TransitionTable.symmetric(LatticeKind.GRAPHITE, p=0.0)
        record = simulate(table, 300, rng_spec)
        assert record.counters[2] == 301
        assert record.S[2] == 0.0


class TestStep:
    def test_step_uses_one_uniform(self, ice_table, rng_spec):
        generator = make_generator(rng_spec)
        state = origin(LatticeKind.ICE)
        for _ in range(20):
            state, _ = step(state, ice_table, generator)
        record = simulate(ice_table, 20, rng_spec)
        assert state == record.state


class TestCheckpoints:
    def test_checkpoints_follow_one_path(self, skewed_ice_table, rng_spec):
        samples = sample_checkpoints(skewed_ice_table, [16, 64, 256], rng_spec)
        assert [s.n for s in samples] == [16, 64, 256]
        record = simulate(skewed_ice_table, 64, rng_spec)
        assert np.allclose(samples[1].S, record.S)
        assert np.array_equal(samples[1].counters, record.counters)


class TestBatch:
    def test_thread_count_does_not_change_result(self, skewed_graphite_table, rng_spec, monkeypatch):
        monkeypatch.setattr(settings, "BATCH_BLOCK_SIZE", 16)
        one = run_batch(skewed_graphite_table, 50, 100, rng_spec, threads=1)
        four = run_batch(skewed_graphite_table, 50, 100, rng_spec, threads=4)
        assert np.array_equal(one.mean_S, four.mean_S)
        assert np.array_equal(one.cov_scaled, four.cov_scaled)

    def test_replicates_are_streams(self, ice_table, rng_spec):
        batch = run_batch(ice_table, 30, 3, rng_spec, threads=1)
        finals = [simulate(ice_table, 30, rng_spec.stream(r)).S for r in range(3)]
        assert np.allclose(batch.mean_S, np.mean(finals, axis=0))

    def test_symmetric_ice_covariance(self, ice_table, rng_spec):
        batch = run_batch(ice_table, 200, 4000, rng_spec)
        assert np.allclose(batch.cov_scaled, np.diag([0.4, 0.4, 0.2]), atol=0.05)

    def test_symmetric_graphite_counter_means(self, graphite_table, rng_spec):
        p = graphite_table.p
        batch = run_batch(graphite_table, 2000, 500, rng_spec)
        assert batch.counter_means.shape == (3,)
        assert batch.counter_means[0] == pytest.approx(1 / 2000)
        assert batch.counter_means[1] == pytest.approx(p / (2 - p), abs=5e-3)
        assert abs(batch.counter_means[2]) < 1e-2

    @pytest.mark.parametrize("replicates,n", [(1, 10), (10, 0)])
    def test_rejects_degenerate_batches(self, ice_table, rng_spec, replicates, n):
        with pytest.raises(DomainError):
            run_batch(ice_table, n, replicates, rng_spec)

    def test_geometry_scales_positions(self, rng_spec):
        base = TransitionTable.symmetric(LatticeKind.ICE)
        scaled = TransitionTable.symmetric(LatticeKind.ICE, geometry=GeometryParams(a=2.0, h=3.0))
        s1 = simulate(base, 100, rng_spec).S
        s2 = simulate(scaled, 100, rng_spec).S
        assert np.allclose(s2, s1 * [2.0, 2.0, 3.0])
