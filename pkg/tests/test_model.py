"""Core model: parameters, benefit curves, waits, service families."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpricer.model import (
    CostShape,
    Deterministic,
    ExponentialService,
    GammaService,
    Hyperexponential2,
    ModelParams,
    Policy,
    constant_cost_load,
    cost,
    cost_np,
    cost_pr,
    cost_shape_pr,
    make_service_distribution,
    wait_times,
)

params_st = st.builds(
    ModelParams,
    st.floats(0.01, 0.94),
    st.just(1.0),
    st.floats(1.0, 20.0),
)


class TestModelParams:
    def test_rho(self):
        assert ModelParams(0.5, 2.0, 3.0).rho == 0.25

    @pytest.mark.parametrize(
        "lam, mu, K",
        [
            (0.0, 1.0, 2.0),
            (-0.5, 1.0, 2.0),
            (1.0, 1.0, 2.0),  # rho = 1
            (1.2, 1.0, 2.0),  # rho > 1
            (0.5, 0.0, 2.0),
            (0.5, 1.0, 0.9),  # K < 1 infeasible for any distribution
            (math.inf, 1.0, 2.0),
            (math.nan, 1.0, 2.0),
        ],
    )
    def test_rejects_infeasible(self, lam, mu, K):
        with pytest.raises(ValueError):
            ModelParams(lam, mu, K)

    def test_frozen(self):
        p = ModelParams(0.5, 1.0, 2.0)
        with pytest.raises(AttributeError):
            p.lam = 0.7


class TestCostCurves:
    def test_np_reference_point(self):
        # K rho^2 / (2 mu (1-rho)(1-phi rho)) at rho=0.5, K=2, phi=2/3:
        # 2*0.25 / (2*0.5*(2/3)) = 0.75
        p = ModelParams(0.5, 1.0, 2.0)
        assert cost_np(p, 2.0 / 3.0) == pytest.approx(0.75, rel=1e-12)

    def test_pr_reference_point(self):
        # (K rho + (2-K) phi rho (1-rho)) / (2 mu (1-rho)(1-phi rho))
        # = (0.6 - 4*0.5*0.1*0.9) / (2*0.9*0.95) = 14/57 at rho=0.1, K=6
        p = ModelParams(0.1, 1.0, 6.0)
        assert cost_pr(p, 0.5) == pytest.approx(14.0 / 57.0, rel=1e-12)

    def test_dispatch(self):
        p = ModelParams(0.3, 1.0, 4.0)
        assert cost(p, Policy.NP, 0.4) == cost_np(p, 0.4)
        assert cost(p, Policy.PR, 0.4) == cost_pr(p, 0.4)

    @pytest.mark.parametrize("phi", [-0.01, 1.01, math.nan])
    def test_rejects_bad_phi(self, phi):
        p = ModelParams(0.3, 1.0, 4.0)
        with pytest.raises(ValueError):
            cost_np(p, phi)
        with pytest.raises(ValueError):
            cost_pr(p, phi)

    @given(params_st, st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_benefit_equals_wait_gap(self, p, phi):
        # The upgrade benefit is exactly the wait saved by going premium.
        for policy in Policy:
            w_p, w_o = wait_times(p, policy, phi)
            assert cost(p, policy, phi) == pytest.approx(
                w_o - w_p, rel=1e-9, abs=1e-12
            )

    @given(params_st, st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_benefit_positive(self, p, phi):
        assert cost_np(p, phi) > 0
        assert cost_pr(p, phi) > 0

    @given(params_st)
    @settings(max_examples=200)
    def test_np_always_increasing(self, p):
        phis = np.linspace(0.0, 1.0, 11)
        vals = [cost_np(p, x) for x in phis]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestCostShape:
    def test_knife_edge_location(self):
        assert constant_cost_load(4.0) == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert constant_cost_load(6.0) == pytest.approx(0.4, rel=1e-12)
        assert math.isnan(constant_cost_load(2.0))
        assert math.isnan(constant_cost_load(1.0))

    def test_knife_edge_flat_value(self):
        # At rho = (K-2)/(2K-2) the curve is flat at (K-2)/(2 mu).
        p = ModelParams(1.0 / 3.0, 1.0, 4.0)
        assert cost_shape_pr(p) is CostShape.CONSTANT
        for phi in (0.0, 0.2, 0.5, 0.8, 1.0):
            assert cost_pr(p, phi) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize(
        "lam, K, expected",
        [
            (0.1, 6.0, CostShape.MONOTONE_DECREASING),
            (0.5, 6.0, CostShape.MONOTONE_INCREASING),  # above (K-2)/(2K-2)=0.4
            (0.3, 2.0, CostShape.MONOTONE_INCREASING),  # K <= 2 always rises
            (0.3, 1.0, CostShape.MONOTONE_INCREASING),
        ],
    )
    def test_classification(self, lam, K, expected):
        assert cost_shape_pr(ModelParams(lam, 1.0, K)) is expected

    @given(params_st)
    @settings(max_examples=300)
    def test_shape_matches_endpoint_order(self, p):
        shape = cost_shape_pr(p)
        c0, c1 = cost_pr(p, 0.0), cost_pr(p, 1.0)
        if shape is CostShape.MONOTONE_INCREASING:
            assert c1 > c0
        elif shape is CostShape.MONOTONE_DECREASING:
            assert c1 < c0
        else:
            assert c1 == pytest.approx(c0, rel=1e-9)


class TestWaitTimes:
    def test_np_ordinary_scales_premium(self):
        p = ModelParams(0.4, 1.0, 3.0)
        w_p, w_o = wait_times(p, Policy.NP, 0.6)
        assert w_o == pytest.approx(w_p / (1.0 - p.rho), rel=1e-12)

    def test_pr_premium_ignores_ordinary_load(self):
        # Premium wait under PR depends only on the premium sub-queue.
        p = ModelParams(0.1, 1.0, 6.0)
        w_p, _ = wait_times(p, Policy.PR, 0.5)
        assert w_p == pytest.approx(6.0 * 0.5 * 0.1 / (2.0 * 0.95), rel=1e-12)

    def test_pr_phi_zero_is_plain_fcfs(self):
        # With nobody premium, PR ordinary wait is the plain M/G/1 wait.
        p = ModelParams(0.5, 1.0, 2.0)
        _, w_o = wait_times(p, Policy.PR, 0.0)
        assert w_o == pytest.approx(1.0, rel=1e-12)

    @given(params_st, st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_ordinary_waits_longer(self, p, phi):
        for policy in Policy:
            w_p, w_o = wait_times(p, policy, phi)
            assert 0.0 <= w_p < w_o

    @given(params_st)
    @settings(max_examples=100)
    def test_all_join_matches_fcfs_np(self, p):
        # phi = 1 collapses NP to one class; premium wait is the M/G/1 wait.
        w_p, _ = wait_times(p, Policy.NP, 1.0)
        pk = p.K * p.rho / (2.0 * p.mu * (1.0 - p.rho))
        assert w_p == pytest.approx(pk, rel=1e-9)


class TestServiceDistributions:
    @pytest.mark.parametrize(
        "K, family",
        [
            (1.0, Deterministic),
            (1.5, GammaService),
            (2.0, ExponentialService),
            (2.0000000001, Hyperexponential2),
            (6.0, Hyperexponential2),
        ],
    )
    def test_family_selection(self, K, family):
        assert isinstance(make_service_distribution(1.0, K), family)

    @pytest.mark.parametrize("K", [1.0, 1.2, 1.5, 1.9, 2.0, 2.5, 4.0, 6.0, 20.0])
    @pytest.mark.parametrize("mu", [0.5, 1.0, 3.0])
    def test_moments_exact(self, K, mu):
        dist = make_service_distribution(mu, K)
        assert dist.mean() == pytest.approx(1.0 / mu, rel=1e-12)
        assert dist.second_moment() == pytest.approx(K / mu**2, rel=1e-12)
        assert dist.moment(1) == pytest.approx(1.0 / mu, rel=1e-12)
        assert dist.moment(2) == pytest.approx(K / mu**2, rel=1e-12)

    @pytest.mark.parametrize("K", [1.0, 1.5, 2.0, 4.0, 6.0])
    def test_sample_moments(self, K):
        dist = make_service_distribution(1.0, K)
        x = dist.sample(np.random.default_rng(2024), 400_000)
        assert x.shape == (400_000,)
        assert (x >= 0).all()
        assert x.mean() == pytest.approx(1.0, rel=0.02)
        assert (x**2).mean() == pytest.approx(K, rel=0.05)

    def test_sampling_deterministic(self):
        dist = make_service_distribution(1.0, 6.0)
        a = dist.sample(np.random.default_rng(7), 1000)
        b = dist.sample(np.random.default_rng(7), 1000)
        assert (a == b).all()

    def test_h2_balanced_means(self):
        # Both phases contribute half the mean: p/r1 == (1-p)/r2.
        dist = make_service_distribution(1.0, 6.0)
        p = dist.p
        r1, r2 = dist.rates
        assert p / r1 == pytest.approx((1.0 - p) / r2, rel=1e-12)

    def test_gamma_shape_scale(self):
        dist = make_service_distribution(2.0, 1.5)
        assert dist.shape == pytest.approx(2.0, rel=1e-12)  # 1/(K-1)
        assert dist.scale == pytest.approx(0.25, rel=1e-12)  # (K-1)/mu

    @pytest.mark.parametrize("K", [0.5, 0.99])
    def test_rejects_infeasible_K(self, K):
        with pytest.raises(ValueError):
            make_service_distribution(1.0, K)

    def test_rejects_bad_mu(self):
        with pytest.raises(ValueError):
            make_service_distribution(0.0, 2.0)
