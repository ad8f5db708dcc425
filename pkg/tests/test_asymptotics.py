"""
Tests for the closed-form limit objects
"""

import math

import numpy as np
import pytest

from crystalwalk.core.errors import DomainError, NormalizationError
from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import LatticeKind
from crystalwalk.services import kernels
from crystalwalk.services.asymptotics import (
    derived_rates,
    gamma_from_lambda,
    helper_vectors,
    lln_rate_bound,
    stationary_weights,
    summarize,
    summary_from_class_moments,
)


def _assert_same_summary(left, right, atol=1e-10):
    ours = left.coefficients()
    theirs = right.coefficients()
    assert ours.keys() == theirs.keys()
    for field, value in theirs.items():
        assert np.allclose(ours[field], value, atol=atol), field


class TestReferenceValues:
    def test_symmetric_ice(self, ice_table):
        summary = summarize(ice_table)
        assert np.allclose(summary.mu, 0.0)
        assert np.allclose(summary.theta, 0.0)
        assert np.allclose(summary.lln_limit, 0.0)
        assert np.allclose(summary.Gamma, np.diag([0.4, 0.4, 0.2]))

    def test_symmetric_graphite(self, graphite_table):
        summary = summarize(graphite_table)
        assert np.allclose(summary.lln_limit, 0.0)
        assert np.allclose(summary.Gamma, np.diag([4 / 9, 4 / 9, 1 / 9]))
        assert np.allclose(summary.counter_limits, [0.0, 0.2 / 1.8, 0.0])

    def test_ice_all_vertical(self):
        table = TransitionTable(kind=LatticeKind.ICE, p=1.0, alpha=0.8, horizontal=[[0.0] * 3, [0.0] * 3])
        summary = summarize(table)
        assert np.allclose(summary.theta, 0.0)
        assert np.allclose(summary.nu, 0.0)
        assert np.allclose(summary.Gamma, np.diag([0.0, 0.0, 1.0 - 0.6**2]))
        assert summary.counter_limits[0] == 1.0

    def test_zigzag_has_no_fluctuations(self):
        table = TransitionTable(kind=LatticeKind.ICE, p=0.0, alpha=0.5, horizontal=[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        summary = summarize(table)
        assert np.allclose(summary.mu, 0.0)
        assert np.allclose(summary.theta, [1.0, 0.0, 0.0])
        assert np.allclose(summary.Gamma, 0.0)

    def test_vertical_drift(self):
        table = TransitionTable.symmetric(LatticeKind.ICE, p=0.4, alpha=0.9, geometry={"a": 1.0, "h": 2.0})
        summary = summarize(table)
        assert math.isclose(summary.mu[2], 2.0 * 0.4 * 0.8)
        assert math.isclose(summary.zeta[2], summary.mu[2])

    def test_derived_rates(self, skewed_ice_table):
        rates = derived_rates(skewed_ice_table)
        assert np.allclose(rates.u, [0.3, 0.6])
        assert np.allclose(rates.v, [0.1, 0.1])
        assert rates.s is None


class TestIndependentEvaluation:
    def test_skewed_ice(self, skewed_ice_table):
        _assert_same_summary(summarize(skewed_ice_table), summary_from_class_moments(skewed_ice_table))

    def test_skewed_graphite(self, skewed_graphite_table):
        _assert_same_summary(summarize(skewed_graphite_table), summary_from_class_moments(skewed_graphite_table))

    @pytest.mark.parametrize("kind", list(LatticeKind))
    def test_random_tables(self, kind, rng):
        for _ in range(100):
            table = kernels.random_table(kind, rng)
            _assert_same_summary(summarize(table), summary_from_class_moments(table))

    @pytest.mark.parametrize("kind,p", [(LatticeKind.ICE, 0.0), (LatticeKind.ICE, 1.0), (LatticeKind.GRAPHITE, 0.0)])
    def test_boundary_p(self, kind, p, rng):
        for _ in range(20):
            table = kernels.random_table(kind, rng, p=p)
            _assert_same_summary(summarize(table), summary_from_class_moments(table))

    def test_gamma_is_projected_lambda(self, skewed_graphite_table, skewed_ice_table):
        for table in (skewed_ice_table, skewed_graphite_table):
            summary = summarize(table)
            assert np.allclose(gamma_from_lambda(summary), summary.Gamma, atol=1e-12)

    def test_gamma_psd(self, rng):
        for kind in LatticeKind:
            for _ in range(50):
                summary = summarize(kernels.random_table(kind, rng))
                assert np.allclose(summary.Gamma, summary.Gamma.T)
                assert summary.min_eigenvalue > -1e-10


class TestSpecialCases:
    def test_graphite_p0_matches_ice_p0(self, rng):
        flat = kernels.random_table(LatticeKind.ICE, rng, p=0.0)
        r0, r1 = (list(r) for r in flat.horizontal)
        twin = TransitionTable(
            kind=LatticeKind.GRAPHITE, p=0.0, alpha=flat.alpha, horizontal=[[r0, r0], [r1, r1]], geometry=flat.geometry
        )
        ice, graphite = summarize(flat), summarize(twin)
        assert np.allclose(graphite.lln_limit, ice.lln_limit, atol=1e-12)
        assert np.allclose(graphite.Gamma, ice.Gamma, atol=1e-12)

    def test_graphite_p0_counter_limits(self):
        summary = summarize(TransitionTable.symmetric(LatticeKind.GRAPHITE, p=0.0))
        assert np.allclose(summary.counter_limits, [0.0, 0.0, 1.0])
        assert helper_vectors(summary)["rho_p"] is None

    def test_graphite_p0_bracket_includes_delta(self, rng):
        summary = summarize(kernels.random_table(LatticeKind.GRAPHITE, rng, p=0.0))
        assert np.allclose(summary.Lambda[:3, :3], summary.sigma2 + summary.delta, atol=1e-12)
        assert np.allclose(summary.Lambda[:3, :3], summary.Gamma, atol=1e-12)
        assert np.allclose(summary.Lambda[3:, :], 0.0)

    def test_cancellation_flag(self):
        summary = summarize(TransitionTable.symmetric(LatticeKind.ICE, p=1.0 - 1e-12))
        assert summary.cancellation_flag
        assert not summarize(TransitionTable.symmetric(LatticeKind.ICE, p=0.5)).cancellation_flag

    def test_stationary_weights_sum_to_one(self):
        for p in (0.0, 0.3, 1.0):
            summary = summarize(TransitionTable.symmetric(LatticeKind.GRAPHITE, p=p))
            weights = stationary_weights(LatticeKind.GRAPHITE, summary.counter_limits)
            assert math.isclose(weights.sum(), 1.0)
            assert (weights >= 0.0).all()

    def test_invalid_table_rejected(self):
        table = TransitionTable(kind=LatticeKind.ICE, p=0.2, alpha=0.5, horizontal=[[0.5, 0.5, 0.5], [0.2, 0.3, 0.3]])
        with pytest.raises(NormalizationError):
            summarize(table)


class TestRateBound:
    def test_value(self):
        assert math.isclose(lln_rate_bound(1024), math.log(1024) / 1024)

    @pytest.mark.parametrize("n", [0, 1])
    def test_small_n(self, n):
        with pytest.raises(DomainError):
            lln_rate_bound(n)
