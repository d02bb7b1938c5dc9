"""Equilibria of the joining game for a given fee and policy.

A customer compares the upgrade benefit C(phi) = E[W_o] - E[W_p] against the
fee. Three kinds of state can be self-consistent: everyone joins, nobody
joins, or an interior fraction at which customers are exactly indifferent.
When the PR benefit curve is flat, every fraction is indifferent at the flat
fee and the whole interval is an equilibrium continuum.

Tie-breaking: customers who are exactly indifferent join. In particular a fee
equal to the benefit at phi = 1 still supports the all-join state, which is
what lets a provider charge the boundary fee and keep everyone in.

"Stable" means asymptotically stable under the damped best-response dynamics
in ``qpricer.sim.dynamics``: pure equilibria always are, interior ones only
when the governing benefit curve is decreasing, and continuum members are
neutrally stable (reported as not stable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import (
    CostShape,
    ModelParams,
    Policy,
    cost_np,
    cost_pr,
    cost_shape_pr,
)

__all__ = [
    "EquilibriumKind",
    "Equilibrium",
    "EquilibriumSet",
    "some_join_np",
    "some_join_pr",
    "equilibria",
    "is_stable",
]

# Residual tolerance for interior roots and for matching a fee against the
# flat-benefit value.
ROOT_RTOL = 1e-9


class EquilibriumKind(Enum):
    ALL_JOIN = "all_join"
    NONE_JOIN = "none_join"
    SOME_JOIN = "some_join"
    CONTINUUM = "continuum"


@dataclass(frozen=True)
class Equilibrium:
    """One equilibrium: its kind, joining fraction, and stability flag.

    ``phi`` is 1.0 for all-join, 0.0 for none-join, the interior root for
    some-join, and None for the continuum (every phi in [0, 1] qualifies).
    """

    kind: EquilibriumKind
    phi: float | None
    stable: bool


@dataclass(frozen=True)
class EquilibriumSet:
    """All equilibria of one game instance (params, policy, fee)."""

    params: ModelParams
    policy: Policy
    fee: float
    equilibria: tuple[Equilibrium, ...]

    def kinds(self) -> set[EquilibriumKind]:
        return {eq.kind for eq in self.equilibria}

    def stable(self) -> tuple[Equilibrium, ...]:
        return tuple(eq for eq in self.equilibria if eq.stable)


def some_join_np(params: ModelParams, fee: float) -> float:
    """Interior root of C_NP(phi) = fee:

        phi = 1/rho - K rho / (2 mu fee (1 - rho))

    Requires C_NP(0) < fee < C_NP(1); a fee at either endpoint puts the root
    on the boundary, where the state is a pure equilibrium instead.
    """
    lo = cost_np(params, 0.0)
    hi = cost_np(params, 1.0)
    if not lo < fee < hi:
        raise ValueError(
            f"no interior root: fee {fee} not strictly inside "
            f"(C_NP(0), C_NP(1)) = ({lo:.9g}, {hi:.9g})"
        )
    rho = params.rho
    return 1.0 / rho - params.K * rho / (2.0 * params.mu * fee * (1.0 - rho))


def some_join_pr(params: ModelParams, fee: float) -> float:
    """Interior root of C_PR(phi) = fee:

        phi_e = (2 mu fee (1 - rho) - K rho)
                / (rho (1 - rho)(2 mu fee + 2 - K))

    Requires the benefit curve to be non-flat and the fee to lie strictly
    between its values at phi = 0 and phi = 1.
    """
    shape = cost_shape_pr(params)
    if shape is CostShape.CONSTANT:
        raise ValueError(
            "PR benefit is constant at this (K, rho): no isolated interior root"
        )
    c0 = cost_pr(params, 0.0)
    c1 = cost_pr(params, 1.0)
    lo, hi = min(c0, c1), max(c0, c1)
    if not lo < fee < hi:
        raise ValueError(
            f"no interior root: fee {fee} not strictly inside "
            f"({lo:.9g}, {hi:.9g}) spanned by C_PR on [0, 1]"
        )
    rho = params.rho
    mu = params.mu
    return (2.0 * mu * fee * (1.0 - rho) - params.K * rho) / (
        rho * (1.0 - rho) * (2.0 * mu * fee + 2.0 - params.K)
    )


def equilibria(params: ModelParams, policy: Policy, fee: float) -> EquilibriumSet:
    """Enumerate every equilibrium at the given fee, with stability flags.

    Increasing benefit (NP always, PR for K <= 2 or high load): interior fees
    support both pure states plus an unstable interior root; fees outside the
    benefit range leave a single pure equilibrium. Decreasing benefit (PR,
    K > 2, low load): interior fees give a unique stable interior equilibrium.
    Flat benefit (PR knife edge): the matching fee yields the continuum.
    """
    if not (math.isfinite(fee) and fee > 0.0):
        raise ValueError(f"fee must be a positive finite cost, got {fee!r}")

    if policy is Policy.NP:
        shape = CostShape.MONOTONE_INCREASING
        benefit = cost_np
    else:
        shape = cost_shape_pr(params)
        benefit = cost_pr
    c0 = benefit(params, 0.0)
    c1 = benefit(params, 1.0)

    all_join = Equilibrium(EquilibriumKind.ALL_JOIN, 1.0, True)
    none_join = Equilibrium(EquilibriumKind.NONE_JOIN, 0.0, True)

    if shape is CostShape.CONSTANT:
        if math.isclose(fee, c0, rel_tol=ROOT_RTOL):
            members = (Equilibrium(EquilibriumKind.CONTINUUM, None, False),)
        elif fee < c0:
            members = (all_join,)
        else:
            members = (none_join,)
    elif shape is CostShape.MONOTONE_INCREASING:
        if fee <= c0:
            # At fee == C(0) the indifferent customers join, which breaks the
            # none-join state; all-join survives since the fee is below C(1).
            members = (all_join,)
        elif fee < c1:
            root = some_join_np(params, fee) if policy is Policy.NP else some_join_pr(params, fee)
            members = (
                all_join,
                none_join,
                Equilibrium(EquilibriumKind.SOME_JOIN, root, False),
            )
        elif fee == c1:
            # Join-when-indifferent keeps all-join alive at the boundary fee.
            members = (all_join, none_join)
        else:
            members = (none_join,)
    else:  # MONOTONE_DECREASING: c1 < c0
        if fee <= c1:
            members = (all_join,)
        elif fee < c0:
            root = some_join_pr(params, fee)
            members = (Equilibrium(EquilibriumKind.SOME_JOIN, root, True),)
        else:
            members = (none_join,)

    return EquilibriumSet(params, policy, fee, members)


def is_stable(
    params: ModelParams, policy: Policy, fee: float, eq: Equilibrium
) -> bool:
    """Stability flag of ``eq`` within the instance's equilibrium set.

    Raises if ``eq`` is not an equilibrium of (params, policy, fee).
    """
    eq_set = equilibria(params, policy, fee)
    for member in eq_set.equilibria:
        if member.kind is not eq.kind:
            continue
        if member.phi is None or eq.phi is None:
            same_phi = member.phi is None and eq.phi is None
        else:
            same_phi = math.isclose(member.phi, eq.phi, rel_tol=1e-9, abs_tol=1e-12)
        if same_phi:
            return member.stable
    raise ValueError(
        f"{eq} is not an equilibrium of (policy={policy.value}, fee={fee})"
    )
