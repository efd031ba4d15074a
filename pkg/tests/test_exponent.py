import math

import numpy as np
import pytest

from coopcast.analytics import exact_outage, log_exact_outage
from coopcast.exponent import (
    SweepPoint,
    UnattainableTarget,
    asymptotic_exponent,
    default_grid,
    empirical_slope,
    envelope_at,
    network_size_gap,
    required_network_size,
    sweep_exponent,
    sweep_points,
    upper_envelope,
)
from coopcast.protocol import ProtocolParams, rate_profile

FIG2_EXPONENT = 0.0761183223701625


class TestAsymptoticExponent:
    def test_operating_point(self, fig2):
        assert asymptotic_exponent(fig2) == pytest.approx(FIG2_EXPONENT, rel=1e-12)

    def test_slopes_agree(self, fig2):
        e = asymptotic_exponent(fig2)
        su, sm = empirical_slope(fig2, 2000, "uc"), empirical_slope(fig2, 2000, "mc")
        assert abs(su - sm) / su < 0.05
        assert abs(su - e) / e < 0.01

    def test_mc_offset_is_log_k(self, fig2):
        # at large K the two curves differ by ln K, which leaves the slope unchanged
        K = 3000
        gap = log_exact_outage(fig2, K, "mc") - log_exact_outage(fig2, K, "uc")
        assert gap == pytest.approx(math.log(K), abs=1e-3)

    def test_random_draws(self):
        # raw slope: only meaningful once E K dominates the ln K prefactor
        rng = np.random.default_rng(20)
        checked = 0
        while checked < 10:
            a, b = rng.uniform(0.05, 0.95, 2)
            p = ProtocolParams(a, b)
            e = asymptotic_exponent(p)
            if e * 2000 < 10:
                continue
            assert abs(empirical_slope(p, 2000) - e) / e < 0.1
            checked += 1

    def test_random_draws_prefactor_corrected(self):
        rng = np.random.default_rng(20)
        for a, b in rng.uniform(0.05, 0.95, size=(10, 2)):
            p = ProtocolParams(a, b)
            e = asymptotic_exponent(p)
            slope = empirical_slope(p, 2000) - 0.5 * math.log(2) / 2000
            assert abs(slope - e) / e < 0.05

    @pytest.mark.parametrize("alpha", [0.05, 0.5, 0.95])
    def test_nonnegative_near_full_backoff(self, alpha):
        for b in (0.9, 0.99, 0.999999):
            assert asymptotic_exponent(ProtocolParams(alpha, b)) >= 0.0


class TestEnvelope:
    @pytest.fixture(scope="class")
    @staticmethod
    def sweep():
        a, b = default_grid(100)
        return sweep_exponent(1.0, a, b)

    def test_point_count_and_order(self, sweep):
        points, _ = sweep
        a, b = default_grid(100)
        assert len(points) == 10_000
        assert (points[0].alpha, points[0].beta) == (a[0], b[0])
        assert (points[1].alpha, points[1].beta) == (a[0], b[1])

    def test_point_invariants(self, sweep):
        points, _ = sweep
        for p in points:
            assert p.exponent >= 0
            assert 0 < p.rate_fraction < 1
            assert not p.chernoff_exceeds

    def test_nonincreasing(self, sweep):
        _, (edges, env) = sweep
        assert np.all(np.diff(env) <= 0)
        assert np.all(np.diff(edges) > 0)

    def test_half_capacity_ordering(self, sweep):
        _, (edges, env) = sweep
        assert envelope_at(edges, env, 0.6) < envelope_at(edges, env, 0.3)

    def test_vanishes_near_capacity(self, sweep):
        _, (edges, env) = sweep
        assert envelope_at(edges, env, 0.99) == 0.0
        assert env[-10:].max() < 1e-3 * env[0]

    def test_dominates_points(self, sweep):
        points, (edges, env) = sweep
        for p in points[::37]:
            assert envelope_at(edges, env, p.rate_fraction) >= p.exponent

    def test_superset_grid_never_lowers(self):
        a, b = default_grid(20)
        _, (_, small) = sweep_exponent(1.0, a, b)
        a2 = np.union1d(a, np.linspace(0.05, 0.95, 7))
        _, (_, big) = sweep_exponent(1.0, a2, b)
        assert np.all(big >= small)

    def test_single_point_consistency(self):
        points, _ = sweep_exponent(1.0, [0.37], [0.42])
        p = ProtocolParams(0.37, 0.42)
        assert points[0].exponent == asymptotic_exponent(p)
        assert points[0].rate_fraction == rate_profile(p).rate_fraction

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            sweep_exponent(1.0, [], [0.5])
        with pytest.raises(ValueError):
            upper_envelope([])

    def test_out_of_range_grid(self):
        with pytest.raises(ValueError):
            sweep_points(1.0, [0.5, 1.0], [0.5])

    def test_bins(self):
        pts = [SweepPoint(0.5, 0.5, 0.25, 2.0, 0.1), SweepPoint(0.5, 0.5, 0.55, 1.0, 0.1)]
        edges, env = upper_envelope(pts, bins=4)
        np.testing.assert_allclose(edges, [0.0, 0.25, 0.5, 0.75])
        np.testing.assert_allclose(env, [2.0, 2.0, 1.0, 0.0])

    def test_workers_do_not_change_output(self):
        a, b = default_grid(12)
        assert sweep_points(1.0, a, b, workers=1) == sweep_points(1.0, a, b, workers=2)


class TestRequiredSize:
    def test_trivial_target(self, fig2):
        assert required_network_size(fig2, "uc", 1.0) == 1
        assert required_network_size(fig2, "mc", 1.0) == 1

    @pytest.mark.parametrize("eps", [0.38, 0.3, 0.1, 1e-2, 1e-3, 1e-5])
    @pytest.mark.parametrize("mode", ["uc", "mc"])
    def test_matches_linear_scan(self, fig2, eps, mode):
        curve = [exact_outage(fig2, K, mode) for K in range(1, 400)]
        ref = next(K for K, v in enumerate(curve, 1) if v <= eps)
        assert required_network_size(fig2, mode, eps) == ref

    def test_unicast_no_larger(self, fig2):
        for eps in (0.2, 1e-3, 1e-8):
            assert required_network_size(fig2, "uc", eps) <= required_network_size(fig2, "mc", eps)

    @pytest.mark.parametrize("eps", [1e-3, 1e-6])
    def test_gap_prediction(self, fig2, eps):
        gap = network_size_gap(fig2, eps)
        assert gap.gap > 0
        assert gap.relative_error < 0.25

    def test_frozen_sizes(self, fig2):
        gap = network_size_gap(fig2, 1e-3)
        assert (gap.k_uc, gap.k_mc) == (58, 114)

    def test_unattainable(self):
        with pytest.raises(UnattainableTarget):
            required_network_size(ProtocolParams(0.01, 0.02), "uc", 1e-3)

    def test_small_limit(self, fig2):
        with pytest.raises(UnattainableTarget):
            required_network_size(fig2, "uc", 1e-3, k_limit=40)
        assert required_network_size(fig2, "uc", 1e-3, k_limit=58) == 58

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
    def test_domain(self, fig2, eps):
        with pytest.raises(ValueError):
            required_network_size(fig2, "uc", eps)
