"""Core model: validated parameters, service-time families, per-class expected
waits, and the premium-upgrade benefit (cost) functions for both preemption
policies.

Conventions used throughout:

* ``rho = lam / mu`` is the traffic load, required to be in (0, 1).
* ``K`` is the dimensionless second moment of service, ``E[S^2] = K / mu**2``;
  K = 1 is deterministic service, K = 2 exponential, K > 2 more variable.
* ``phi`` is the fraction of customers who buy the premium upgrade.
* A "wait" excludes a customer's own nominal service time 1/mu; under
  preemptive-resume it includes the extra delay inflicted while the customer's
  service is suspended by preemptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Policy",
    "CostShape",
    "ModelParams",
    "ServiceDistribution",
    "Deterministic",
    "GammaService",
    "ExponentialService",
    "Hyperexponential2",
    "make_service_distribution",
    "cost_np",
    "cost_pr",
    "cost",
    "cost_shape_pr",
    "constant_cost_load",
    "wait_times",
]

# Relative tolerance for detecting the knife-edge load at which the PR benefit
# curve is exactly flat. Callers wanting the knife edge must hit it this close.
KNIFE_EDGE_RTOL = 1e-9


class Policy(Enum):
    """Priority discipline: non-preemptive or preemptive-resume."""

    NP = "np"
    PR = "pr"


class CostShape(Enum):
    """Monotonicity of the PR upgrade benefit as a function of phi."""

    MONOTONE_INCREASING = "increasing"
    CONSTANT = "constant"
    MONOTONE_DECREASING = "decreasing"


@dataclass(frozen=True)
class ModelParams:
    """Exogenous environment of the upgrade game.

    lam: mean Poisson arrival rate (> 0)
    mu:  mean service rate (> 0); mean service time is 1/mu
    K:   second moment of service in units of 1/mu^2 (>= 1)

    Construction validates feasibility; ``rho`` is derived.
    """

    lam: float
    mu: float
    K: float

    def __post_init__(self):
        for name in ("lam", "mu", "K"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.mu <= 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        rho = self.lam / self.mu
        if not 0.0 < rho < 1.0:
            raise ValueError(
                f"rho = lam/mu = {rho} not in (0, 1): queue would be unstable"
            )
        if self.K < 1.0:
            raise ValueError(
                f"K = {self.K} < 1 is infeasible: E[S^2] >= E[S]^2 forces K >= 1"
            )

    @property
    def rho(self) -> float:
        """Traffic load lam/mu."""
        return self.lam / self.mu


def _check_phi(phi: float) -> None:
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")


def cost_np(params: ModelParams, phi: float) -> float:
    """Upgrade benefit E[W_o] - E[W_p] under the non-preemptive policy.

        C_NP(phi) = K rho^2 / (2 mu (1 - rho)(1 - phi rho))

    Strictly positive and strictly increasing in phi for every feasible
    (K, rho).
    """
    _check_phi(phi)
    rho = params.rho
    return params.K * rho * rho / (2.0 * params.mu * (1.0 - rho) * (1.0 - phi * rho))


def cost_pr(params: ModelParams, phi: float) -> float:
    """Upgrade benefit E[W_o] - E[W_p] under preemptive-resume.

        C_PR(phi) = (K rho + (2 - K) phi rho (1 - rho))
                    / (2 mu (1 - rho)(1 - phi rho))

    Strictly positive; monotone increasing, constant, or monotone decreasing
    in phi depending on (K, rho), see ``cost_shape_pr``.
    """
    _check_phi(phi)
    rho = params.rho
    K = params.K
    num = K * rho + (2.0 - K) * phi * rho * (1.0 - rho)
    return num / (2.0 * params.mu * (1.0 - rho) * (1.0 - phi * rho))


def cost(params: ModelParams, policy: Policy, phi: float) -> float:
    """Upgrade benefit for the given policy; dispatches to cost_np/cost_pr."""
    if policy is Policy.NP:
        return cost_np(params, phi)
    return cost_pr(params, phi)


def constant_cost_load(K: float) -> float:
    """Load at which the PR benefit curve is flat: (K - 2) / (2K - 2).

    Only meaningful for K > 2; returns NaN otherwise (the curve is increasing
    for every load when K <= 2).
    """
    if K <= 2.0:
        return math.nan
    return (K - 2.0) / (2.0 * K - 2.0)


def cost_shape_pr(params: ModelParams) -> CostShape:
    """Classify the monotonicity of the PR benefit curve.

    Decreasing iff K > 2 and rho below (K-2)/(2K-2); flat exactly at that
    load (detected within KNIFE_EDGE_RTOL relative); increasing otherwise.
    """
    if params.K > 2.0:
        edge = constant_cost_load(params.K)
        if abs(params.rho - edge) <= KNIFE_EDGE_RTOL * edge:
            return CostShape.CONSTANT
        if params.rho < edge:
            return CostShape.MONOTONE_DECREASING
    return CostShape.MONOTONE_INCREASING


def wait_times(params: ModelParams, policy: Policy, phi: float) -> tuple[float, float]:
    """Per-class expected waits (E[W_p], E[W_o]) at premium fraction phi.

    Standard M/G/1 two-class priority decompositions with class arrival rates
    (phi lam, (1-phi) lam):

        NP:  E[W_p] = K rho / (2 mu (1 - phi rho))
             E[W_o] = K rho / (2 mu (1 - phi rho)(1 - rho))
        PR:  E[W_p] = K phi rho / (2 mu (1 - phi rho))
             E[W_o] = (1/mu)(1/(1 - phi rho) - 1)
                      + K rho / (2 mu (1 - phi rho)(1 - rho))

    The difference E[W_o] - E[W_p] reproduces cost_np / cost_pr exactly.
    """
    _check_phi(phi)
    rho = params.rho
    K = params.K
    mu = params.mu
    if policy is Policy.NP:
        w_p = K * rho / (2.0 * mu * (1.0 - phi * rho))
        w_o = w_p / (1.0 - rho)
    else:
        w_p = K * phi * rho / (2.0 * mu * (1.0 - phi * rho))
        w_o = (1.0 / mu) * (1.0 / (1.0 - phi * rho) - 1.0) + K * rho / (
            2.0 * mu * (1.0 - phi * rho) * (1.0 - rho)
        )
    return w_p, w_o


# ---------------------------------------------------------------------------
# Service-time families
#
# Minimal standard family covering K in [1, inf) with the first two moments
# matched exactly; the mean-wait formulas above depend on nothing beyond the
# first two moments, so higher moments are left to the family's convenience.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ServiceDistribution:
    """A service-time distribution with mean 1/mu and second moment K/mu^2."""

    mu: float
    K: float

    @property
    def family(self) -> str:
        return type(self).__name__

    def mean(self) -> float:
        return self.moment(1)

    def second_moment(self) -> float:
        return self.moment(2)

    def moment(self, k: int) -> float:
        """Analytic k-th raw moment, k >= 1."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` service times using the caller-supplied stream."""
        raise NotImplementedError


@dataclass(frozen=True)
class Deterministic(ServiceDistribution):
    """Every service takes exactly 1/mu (K = 1)."""

    def moment(self, k: int) -> float:
        return self.mu ** (-k)

    def sample(self, rng, size):
        return np.full(size, 1.0 / self.mu)


@dataclass(frozen=True)
class GammaService(ServiceDistribution):
    """Gamma service, shape 1/(K-1) and scale (K-1)/mu, for 1 < K < 2."""

    @property
    def shape(self) -> float:
        return 1.0 / (self.K - 1.0)

    @property
    def scale(self) -> float:
        return (self.K - 1.0) / self.mu

    def moment(self, k: int) -> float:
        value = self.scale**k
        for i in range(k):
            value *= self.shape + i
        return value

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.scale, size)


@dataclass(frozen=True)
class ExponentialService(ServiceDistribution):
    """Exponential service at rate mu (K = 2)."""

    def moment(self, k: int) -> float:
        return math.factorial(k) / self.mu**k

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.mu, size)


@dataclass(frozen=True)
class Hyperexponential2(ServiceDistribution):
    """Two-phase hyperexponential with balanced means, for K > 2.

    Phase probabilities (p, 1-p) with p = (1 + sqrt((K-2)/K)) / 2 and rates
    (2 p mu, 2 (1-p) mu); each phase then contributes half the mean, and the
    second moment works out to K/mu^2 exactly.
    """

    @property
    def p(self) -> float:
        return 0.5 * (1.0 + math.sqrt((self.K - 2.0) / self.K))

    @property
    def rates(self) -> tuple[float, float]:
        return 2.0 * self.p * self.mu, 2.0 * (1.0 - self.p) * self.mu

    def moment(self, k: int) -> float:
        r1, r2 = self.rates
        return math.factorial(k) * (self.p / r1**k + (1.0 - self.p) / r2**k)

    def sample(self, rng, size):
        r1, r2 = self.rates
        # Exactly two uniforms per draw, consumed in row order, so the first
        # n of a larger batch equal a batch of n (callers rely on this when
        # they regrow an input array and replay the stream).
        u = rng.random((size, 2))
        phase_fast = u[:, 0] < self.p
        raw = -np.log1p(-u[:, 1])
        return raw / np.where(phase_fast, r1, r2)


def make_service_distribution(mu: float, K: float) -> ServiceDistribution:
    """Pick the canonical family for (mu, K) with both moments matched exactly.

    K = 1 deterministic, 1 < K < 2 gamma, K = 2 exponential, K > 2 balanced
    two-phase hyperexponential.
    """
    if not (math.isfinite(mu) and mu > 0):
        raise ValueError(f"mu must be a positive finite rate, got {mu!r}")
    if not (math.isfinite(K) and K >= 1.0):
        raise ValueError(f"K = {K!r} is infeasible: need finite K >= 1")
    if K == 1.0:
        return Deterministic(mu, K)
    if K < 2.0:
        return GammaService(mu, K)
    if K == 2.0:
        return ExponentialService(mu, K)
    return Hyperexponential2(mu, K)
