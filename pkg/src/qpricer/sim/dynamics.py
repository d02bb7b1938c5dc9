"""Adaptive best-response dynamics for the premium share.

Each round compares the upgrade benefit at the current share against the
posted fee and nudges the share toward the better response:

    phi_{t+1} = clip(phi_t + step * sign(B(phi_t) - C) * min(|B(phi_t) - C|, 1))

When the benefit exceeds the fee, upgrading is underpriced and the premium
share grows; otherwise it shrinks. The benefit B is evaluated either from
the closed form (default) or from a short simulation at a probe share
(``empirical=True``), which keeps the dynamics honest about what an agent
could actually observe.

Fixed points with interior shares are exactly the mixed equilibria; the
dynamics converges to them when the benefit decreases in phi (stable case)
and walks away to a boundary when it increases (unstable case).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..equilibrium import EquilibriumKind
from ..model import cost
from .engine import run_replication
from .runner import ADAPTIVE, SimConfig

__all__ = ["DynamicsTrace", "adaptive_dynamics"]

#: Rounds with |phi_{t+1} - phi_t| below this threshold count toward
#: convergence; after 50 consecutive such rounds the run is declared settled.
CONVERGENCE_TOL = 1e-6
CONVERGENCE_STREAK = 50

#: Empirical mode probes at clip(phi, PROBE_MARGIN, 1 - PROBE_MARGIN) so both
#: classes are observed even when the state sits on a boundary.
PROBE_MARGIN = 0.01

_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class DynamicsTrace:
    """Full trajectory of one adaptive-dynamics run.

    ``path[t]`` is the premium share entering round ``t``; ``path[-1]`` is the
    final state. ``limit`` classifies that state as an equilibrium kind
    (all-join / none-join at the boundaries, some-join inside).
    """

    path: tuple[float, ...]
    converged: bool
    limit: EquilibriumKind
    limit_phi: float

    @property
    def rounds(self) -> int:
        return len(self.path) - 1

    def to_dict(self) -> dict:
        return {
            "path": [[t, phi] for t, phi in enumerate(self.path)],
            "rounds": self.rounds,
            "converged": self.converged,
            "limit": self.limit.value,
            "limit_phi": self.limit_phi,
        }


def _classify(phi: float) -> EquilibriumKind:
    if phi <= _BOUNDARY_TOL:
        return EquilibriumKind.NONE_JOIN
    if phi >= 1.0 - _BOUNDARY_TOL:
        return EquilibriumKind.ALL_JOIN
    return EquilibriumKind.SOME_JOIN


def adaptive_dynamics(
    config: SimConfig,
    phi0: float,
    rounds: int = 2000,
    step: float = 0.5,
    empirical: bool = False,
) -> DynamicsTrace:
    """Iterate the share update from ``phi0`` and classify where it settles.

    ``config.fee`` is the posted fee and must be set; ``config.phi`` must be
    the adaptive sentinel. In empirical mode each round runs one short
    replication (``config.horizon`` completions, round-specific seed) and
    uses the observed wait gap as the benefit estimate.
    """
    if config.phi != ADAPTIVE:
        raise ValueError("dynamics needs a config with phi=ADAPTIVE")
    if config.fee is None:
        raise ValueError("dynamics needs a posted fee")
    if not 0.0 <= phi0 <= 1.0:
        raise ValueError(f"phi0 must lie in [0, 1], got {phi0!r}")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if not 0.0 < step <= 1.0:
        raise ValueError(f"step must lie in (0, 1], got {step!r}")

    fee = config.fee
    if empirical:
        round_seeds = np.random.SeedSequence(config.seed).generate_state(
            rounds, dtype=np.uint64
        )

    def benefit(phi: float, t: int) -> float:
        if not empirical:
            return cost(config.params, config.policy, phi)
        probe = min(max(phi, PROBE_MARGIN), 1.0 - PROBE_MARGIN)
        stats = run_replication(
            config.params,
            config.policy,
            probe,
            config.horizon,
            config.resolved_warmup,
            int(round_seeds[t]),
        )
        gap = stats.wait_gap
        # A class with no completions in a short run carries no information;
        # leave the state where it is for this round.
        return fee if gap is None else gap

    phi = float(phi0)
    path = [phi]
    streak = 0
    converged = False
    for t in range(rounds):
        delta = benefit(phi, t) - fee
        move = step * np.sign(delta) * min(abs(delta), 1.0)
        nxt = min(1.0, max(0.0, phi + move))
        path.append(nxt)
        if abs(nxt - phi) < CONVERGENCE_TOL:
            streak += 1
        else:
            streak = 0
        phi = nxt
        if streak >= CONVERGENCE_STREAK:
            converged = True
            break

    return DynamicsTrace(
        path=tuple(path),
        converged=converged,
        limit=_classify(phi),
        limit_phi=phi,
    )
