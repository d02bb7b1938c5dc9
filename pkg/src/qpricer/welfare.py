"""Social welfare: population-average expected wait (a cost, lower is better).

S(phi) = phi E[W_p] + (1 - phi) E[W_o]. Fees are a transfer between players
and are excluded. Under NP, reordering customers cannot change the
population-average wait, so S is flat in phi. Under PR a useful reduction is

    S_PR(phi) = S_NP + (2 - K) rho phi (1 - phi) / (2 mu (1 - phi rho)),

so segregating the population (interior phi) helps exactly when service is
more variable than exponential (K > 2) and hurts when it is less (K < 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ModelParams, Policy
from .revenue import max_revenue

__all__ = [
    "PhiSet",
    "WelfareProfile",
    "welfare",
    "socially_optimal",
    "welfare_at_revenue_max",
]


@dataclass(frozen=True)
class PhiSet:
    """A set of joining fractions: either all of [0, 1] or finitely many points."""

    whole_interval: bool
    points: tuple[float, ...] = ()

    def __contains__(self, phi: float) -> bool:
        if self.whole_interval:
            return 0.0 <= phi <= 1.0
        return any(math.isclose(phi, p, rel_tol=1e-9, abs_tol=1e-12) for p in self.points)


@dataclass(frozen=True)
class WelfareProfile:
    """Welfare consequences of revenue-maximizing behavior."""

    policy: Policy
    phi_revenue_max: float
    welfare_at_revenue_max: float
    optimal_states: PhiSet
    optimal_welfare: float


def welfare(params: ModelParams, policy: Policy, phi: float) -> float:
    """Average wait across the whole population at premium fraction phi.

        S_NP       = K rho / (2 mu (1 - rho))                   (flat in phi)
        S_PR(phi)  = rho (K + 2 phi (1 - phi)(1 - rho)
                          - K phi (1 - phi (1 - rho)))
                     / (2 mu (1 - rho)(1 - phi rho))
    """
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    rho = params.rho
    K = params.K
    mu = params.mu
    if policy is Policy.NP:
        return K * rho / (2.0 * mu * (1.0 - rho))
    num = rho * (
        K
        + 2.0 * phi * (1.0 - phi) * (1.0 - rho)
        - K * phi * (1.0 - phi * (1.0 - rho))
    )
    return num / (2.0 * mu * (1.0 - rho) * (1.0 - phi * rho))


def socially_optimal(params: ModelParams, policy: Policy) -> PhiSet:
    """Joining fractions minimizing welfare.

    NP: every phi (welfare is flat). PR: the pure states {0, 1} for K < 2,
    all of [0, 1] for K = 2, and the single interior point

        phi_star = (1 - sqrt(1 - rho)) / rho

    for K > 2.
    """
    if policy is Policy.NP or params.K == 2.0:
        return PhiSet(whole_interval=True)
    if params.K < 2.0:
        return PhiSet(whole_interval=False, points=(0.0, 1.0))
    rho = params.rho
    return PhiSet(whole_interval=False, points=((1.0 - math.sqrt(1.0 - rho)) / rho,))


def welfare_at_revenue_max(params: ModelParams, policy: Policy) -> WelfareProfile:
    """Welfare at the provider's revenue-maximizing fraction vs the optimum.

    Under NP the two coincide trivially (flat welfare). Under PR with
    2 < K <= 4 the revenue maximum sits at phi = 1, which ties phi = 0 for
    the *worst* welfare; with K > 4 at low load the interior revenue maximum
    avoids the worst case but still never reaches the social optimum.
    """
    profile = max_revenue(params, policy)
    at_max = welfare(params, policy, profile.phi_star)
    optimal = socially_optimal(params, policy)
    if optimal.whole_interval:
        best = welfare(params, policy, 0.0)
    else:
        best = min(welfare(params, policy, p) for p in optimal.points)
    return WelfareProfile(policy, profile.phi_star, at_max, optimal, best)
