"""Revenue rates, regime classification, maximizers, and the NP-vs-PR gap.

Revenue is what the provider collects per unit time when the fee is set so
that a fraction phi joins the premium class: R(phi) = lam * phi * C(phi),
where C is the upgrade benefit at which that fraction is indifferent. Closed
forms below eliminate lam and mu through rho, so revenue depends only on
(K, rho, phi) with the fee measured in time units.

Under NP revenue always grows with phi, so the provider prices everyone in.
Under PR the same holds up to K = 4; beyond that, at low enough load the
revenue curve peaks at an interior fraction and the optimal fee leaves part
of the population unupgraded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import ModelParams, Policy, cost_np, cost_pr

__all__ = [
    "RevenueRegime",
    "RevenueShape",
    "RevenueProfile",
    "PolicyComparison",
    "unimodal_load_threshold",
    "revenue",
    "revenue_derivative_pr",
    "revenue_shape_pr",
    "phi_max",
    "max_revenue",
    "compare_policies",
]


class RevenueRegime(Enum):
    MONOTONE_INCREASING = "increasing"
    UNIMODAL = "unimodal"


@dataclass(frozen=True)
class RevenueShape:
    """PR revenue regime; ``rho_bar`` is the load threshold below which the
    curve is unimodal (defined only for K > 4, NaN otherwise)."""

    regime: RevenueRegime
    rho_bar: float


@dataclass(frozen=True)
class RevenueProfile:
    """Revenue-maximizing operating point for one policy."""

    policy: Policy
    shape: RevenueShape
    phi_star: float
    fee_star: float
    revenue_star: float
    stable: bool


@dataclass(frozen=True)
class PolicyComparison:
    """Maximum revenues under both policies; difference = PR - NP (> 0)."""

    rstar_np: float
    rstar_pr: float
    difference: float


def unimodal_load_threshold(K: float) -> float:
    """Load below which PR revenue peaks in the interior:

        rho_bar = 3/2 - sqrt((5K - 2)/(K - 2)) / 2

    Positive only for K > 4; NaN for K <= 4 (revenue is then increasing at
    every load).
    """
    if K <= 4.0:
        return math.nan
    return 1.5 - 0.5 * math.sqrt((5.0 * K - 2.0) / (K - 2.0))


def revenue(params: ModelParams, policy: Policy, phi: float) -> float:
    """Revenue rate lam * phi * C(phi) via the closed forms

        R_NP(phi) = K rho^3 phi / (2 (1 - rho)(1 - phi rho))
        R_PR(phi) = (K phi rho^2 + (2 - K) phi^2 rho^2 (1 - rho))
                    / (2 (1 - rho)(1 - phi rho))
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    rho = params.rho
    K = params.K
    if policy is Policy.NP:
        return K * rho**3 * phi / (2.0 * (1.0 - rho) * (1.0 - phi * rho))
    num = K * phi * rho * rho + (2.0 - K) * phi * phi * rho * rho * (1.0 - rho)
    return num / (2.0 * (1.0 - rho) * (1.0 - phi * rho))


def revenue_derivative_pr(params: ModelParams, phi: float) -> float:
    """d R_PR / d phi by the quotient rule:

        rho^2 (K + (2 - K) phi (1 - rho)(2 - phi rho))
        / (2 (1 - rho)(1 - phi rho)^2)

    The parenthesized factor carries the sign, so the curve is increasing
    exactly while K + (2 - K) phi (1 - rho)(2 - phi rho) > 0.
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    rho = params.rho
    K = params.K
    sign_factor = K + (2.0 - K) * phi * (1.0 - rho) * (2.0 - phi * rho)
    return rho * rho * sign_factor / (2.0 * (1.0 - rho) * (1.0 - phi * rho) ** 2)


def revenue_shape_pr(params: ModelParams) -> RevenueShape:
    """Classify the PR revenue curve: increasing for K <= 4, or for K > 4 at
    loads at or above the threshold; unimodal below it."""
    rho_bar = unimodal_load_threshold(params.K)
    if params.K > 4.0 and params.rho < rho_bar:
        return RevenueShape(RevenueRegime.UNIMODAL, rho_bar)
    return RevenueShape(RevenueRegime.MONOTONE_INCREASING, rho_bar)


def phi_max(params: ModelParams) -> float:
    """Interior maximizer of PR revenue in the unimodal regime:

        phi_max = (1 - sqrt((K - 2 - 2 rho (K - 1)) / ((K - 2)(1 - rho)))) / rho

    Raises when the regime is monotone (the maximum then sits at phi = 1).
    """
    shape = revenue_shape_pr(params)
    if shape.regime is not RevenueRegime.UNIMODAL:
        raise ValueError(
            "PR revenue is monotone increasing at "
            f"(K={params.K}, rho={params.rho}); maximum is at phi = 1, not interior"
        )
    rho = params.rho
    K = params.K
    inner = (K - 2.0 - 2.0 * rho * (K - 1.0)) / ((K - 2.0) * (1.0 - rho))
    return (1.0 - math.sqrt(inner)) / rho


def _rstar_pr_unimodal(params: ModelParams) -> float:
    """Closed-form PR maximum revenue in the unimodal regime."""
    rho = params.rho
    K = params.K
    root = math.sqrt((K - 2.0 - 2.0 * rho * (K - 1.0)) / ((K - 2.0) * (1.0 - rho)))
    return (2.0 * (K - 2.0) - rho * (3.0 * K - 4.0)) / (2.0 * (1.0 - rho)) - (
        K - 2.0
    ) * root


def max_revenue(params: ModelParams, policy: Policy) -> RevenueProfile:
    """Locate the revenue maximum and the fee that attains it.

    NP and monotone PR maximize at phi = 1 with the fee at the benefit's
    right endpoint (indifferent customers join, so the boundary fee holds).
    Unimodal PR maximizes at the interior phi_max; that operating point is a
    stable some-join equilibrium, so the stability flag is True throughout.
    """
    rho = params.rho
    K = params.K
    if policy is Policy.NP:
        shape = RevenueShape(RevenueRegime.MONOTONE_INCREASING, math.nan)
        rstar = K * rho**3 / (2.0 * (1.0 - rho) ** 2)
        return RevenueProfile(policy, shape, 1.0, cost_np(params, 1.0), rstar, True)

    shape = revenue_shape_pr(params)
    if shape.regime is RevenueRegime.MONOTONE_INCREASING:
        rstar = (K * rho * rho + (2.0 - K) * rho * rho * (1.0 - rho)) / (
            2.0 * (1.0 - rho) ** 2
        )
        return RevenueProfile(policy, shape, 1.0, cost_pr(params, 1.0), rstar, True)

    star = phi_max(params)
    return RevenueProfile(
        policy, shape, star, cost_pr(params, star), _rstar_pr_unimodal(params), True
    )


def compare_policies(params: ModelParams) -> PolicyComparison:
    """Maximum-revenue comparison; PR strictly dominates NP everywhere.

    Whenever PR revenue is monotone the boundary gap is exactly
    rho^2 / (1 - rho), independent of K.
    """
    rstar_np = max_revenue(params, Policy.NP).revenue_star
    rstar_pr = max_revenue(params, Policy.PR).revenue_star
    return PolicyComparison(rstar_np, rstar_pr, rstar_pr - rstar_np)
