"""Equilibrium enumeration and mixed-root formulas vs a bisection oracle."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from qpricer.equilibrium import (
    EquilibriumKind,
    equilibria,
    is_stable,
    some_join_np,
    some_join_pr,
)
from qpricer.model import CostShape, ModelParams, Policy, cost, cost_pr, cost_shape_pr


def bisect_root(p: ModelParams, policy: Policy, fee: float) -> float:
    """Independent root of cost(phi) = fee by bracketed bisection."""
    return brentq(
        lambda phi: cost(p, policy, phi) - fee, 0.0, 1.0, xtol=1e-14, rtol=1e-15
    )


class TestMixedRoots:
    def test_np_reference_root(self):
        p = ModelParams(0.5, 1.0, 2.0)
        assert some_join_np(p, 0.75) == pytest.approx(2.0 / 3.0, rel=1e-12)

    def test_pr_reference_root(self):
        p = ModelParams(0.1, 1.0, 6.0)
        assert some_join_pr(p, 14.0 / 57.0) == pytest.approx(0.5, rel=1e-12)

    def test_np_matches_bisection(self):
        rng = np.random.default_rng(314159)
        for _ in range(300):
            K = rng.uniform(1.0, 20.0)
            rho = rng.uniform(0.01, 0.94)
            p = ModelParams(rho, 1.0, K)
            lo, hi = cost(p, Policy.NP, 0.0), cost(p, Policy.NP, 1.0)
            fee = lo + rng.uniform(0.05, 0.95) * (hi - lo)
            assert abs(some_join_np(p, fee) - bisect_root(p, Policy.NP, fee)) < 1e-10

    def test_pr_matches_bisection(self):
        rng = np.random.default_rng(271828)
        done = 0
        while done < 300:
            K = rng.uniform(1.0, 20.0)
            rho = rng.uniform(0.01, 0.94)
            p = ModelParams(rho, 1.0, K)
            if cost_shape_pr(p) is CostShape.CONSTANT:
                continue
            c0, c1 = cost_pr(p, 0.0), cost_pr(p, 1.0)
            lo, hi = min(c0, c1), max(c0, c1)
            fee = lo + rng.uniform(0.05, 0.95) * (hi - lo)
            assert abs(some_join_pr(p, fee) - bisect_root(p, Policy.PR, fee)) < 1e-10
            done += 1

    def test_np_rejects_out_of_range_fee(self):
        p = ModelParams(0.5, 1.0, 2.0)
        with pytest.raises(ValueError):
            some_join_np(p, 0.4)  # below cost(0) = 0.5
        with pytest.raises(ValueError):
            some_join_np(p, 1.5)  # above cost(1) = 1.0

    def test_pr_rejects_constant_shape(self):
        p = ModelParams(1.0 / 3.0, 1.0, 4.0)
        with pytest.raises(ValueError):
            some_join_pr(p, 1.0)


class TestEquilibriumSets:
    def test_increasing_interior_fee_gives_three(self):
        p = ModelParams(0.5, 1.0, 2.0)
        eq_set = equilibria(p, Policy.NP, 0.75)
        kinds = [eq.kind for eq in eq_set.equilibria]
        assert kinds == [
            EquilibriumKind.ALL_JOIN,
            EquilibriumKind.NONE_JOIN,
            EquilibriumKind.SOME_JOIN,
        ]
        mixed = eq_set.equilibria[2]
        assert mixed.phi == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert not mixed.stable
        assert all(eq.stable for eq in eq_set.equilibria[:2])

    def test_decreasing_interior_fee_unique_stable(self):
        p = ModelParams(0.1, 1.0, 6.0)
        eq_set = equilibria(p, Policy.PR, 14.0 / 57.0)
        (mixed,) = eq_set.equilibria
        assert mixed.kind is EquilibriumKind.SOME_JOIN
        assert mixed.phi == pytest.approx(0.5, rel=1e-12)
        assert mixed.stable

    def test_low_fee_all_join(self):
        p = ModelParams(0.5, 1.0, 2.0)
        eq_set = equilibria(p, Policy.NP, 0.3)
        (only,) = eq_set.equilibria
        assert only.kind is EquilibriumKind.ALL_JOIN
        assert only.phi == 1.0 and only.stable

    def test_high_fee_none_join(self):
        p = ModelParams(0.5, 1.0, 2.0)
        eq_set = equilibria(p, Policy.NP, 5.0)
        (only,) = eq_set.equilibria
        assert only.kind is EquilibriumKind.NONE_JOIN
        assert only.phi == 0.0 and only.stable

    def test_boundary_fee_keeps_all_join(self):
        # Indifferent customers join, so fee == cost(1) still supports phi=1.
        p = ModelParams(0.5, 1.0, 2.0)
        eq_set = equilibria(p, Policy.NP, cost(p, Policy.NP, 1.0))
        assert EquilibriumKind.ALL_JOIN in eq_set.kinds()
        assert EquilibriumKind.SOME_JOIN not in eq_set.kinds()

    def test_fee_at_cost_zero_drops_none_join(self):
        # At fee == cost(0) the indifferent mass upgrades, breaking none-join.
        p = ModelParams(0.5, 1.0, 2.0)
        eq_set = equilibria(p, Policy.NP, cost(p, Policy.NP, 0.0))
        assert eq_set.kinds() == {EquilibriumKind.ALL_JOIN}

    def test_knife_edge_continuum(self):
        p = ModelParams(1.0 / 3.0, 1.0, 4.0)
        eq_set = equilibria(p, Policy.PR, 1.0)
        (cont,) = eq_set.equilibria
        assert cont.kind is EquilibriumKind.CONTINUUM
        assert cont.phi is None
        assert not cont.stable

    def test_knife_edge_off_fee(self):
        p = ModelParams(1.0 / 3.0, 1.0, 4.0)
        assert equilibria(p, Policy.PR, 0.5).kinds() == {EquilibriumKind.ALL_JOIN}
        assert equilibria(p, Policy.PR, 2.0).kinds() == {EquilibriumKind.NONE_JOIN}

    def test_rejects_nonpositive_fee(self):
        p = ModelParams(0.5, 1.0, 2.0)
        for fee in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                equilibria(p, Policy.NP, fee)

    def test_never_empty_over_random_instances(self):
        rng = np.random.default_rng(555)
        for _ in range(500):
            K = rng.uniform(1.0, 20.0)
            rho = rng.uniform(0.01, 0.94)
            p = ModelParams(rho, 1.0, K)
            policy = Policy.NP if rng.random() < 0.5 else Policy.PR
            fee = rng.uniform(0.01, 3.0) * cost(p, policy, 0.5)
            eq_set = equilibria(p, policy, fee)
            assert len(eq_set.equilibria) >= 1
            # Each reported mixed equilibrium really is indifferent.
            for eq in eq_set.equilibria:
                if eq.kind is EquilibriumKind.SOME_JOIN:
                    assert 0.0 < eq.phi < 1.0
                    assert cost(p, policy, eq.phi) == pytest.approx(fee, rel=1e-9)

    def test_stability_definition_matches_slope(self):
        # Interior equilibrium stable exactly when the benefit slopes down.
        rng = np.random.default_rng(556)
        for _ in range(300):
            K = rng.uniform(1.0, 20.0)
            rho = rng.uniform(0.01, 0.94)
            p = ModelParams(rho, 1.0, K)
            shape = cost_shape_pr(p)
            if shape is CostShape.CONSTANT:
                continue
            c0, c1 = cost_pr(p, 0.0), cost_pr(p, 1.0)
            fee = min(c0, c1) + 0.5 * abs(c1 - c0)
            for eq in equilibria(p, Policy.PR, fee).equilibria:
                if eq.kind is EquilibriumKind.SOME_JOIN:
                    assert eq.stable == (shape is CostShape.MONOTONE_DECREASING)


class TestIsStable:
    def test_queries_by_membership(self):
        p = ModelParams(0.5, 1.0, 2.0)
        eq_set = equilibria(p, Policy.NP, 0.75)
        for eq in eq_set.equilibria:
            assert is_stable(p, Policy.NP, 0.75, eq) == eq.stable

    def test_rejects_non_equilibrium(self):
        from qpricer.equilibrium import Equilibrium

        p = ModelParams(0.5, 1.0, 2.0)
        fake = Equilibrium(EquilibriumKind.SOME_JOIN, 0.123, False)
        with pytest.raises(ValueError):
            is_stable(p, Policy.NP, 0.75, fake)
