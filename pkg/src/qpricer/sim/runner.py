"""Replication orchestration and statistical summaries.

A :class:`SimConfig` pins every input of a simulation study, including the
master seed; replication seeds are derived from it, so the same config always
yields the same result. Replications run on a thread pool (the compiled core
releases the GIL); ``QP_THREADS`` overrides the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from ..model import ModelParams, Policy, cost, wait_times
from .engine import RepStats, run_replication

__all__ = [
    "ADAPTIVE",
    "SimConfig",
    "SimulationResult",
    "Estimate",
    "ValidationCheck",
    "ValidationReport",
    "replicate",
    "run_sim",
    "validate",
]

#: Sentinel accepted for ``SimConfig.phi``: the premium share is not fixed but
#: driven by adaptive best-response dynamics (see :mod:`.dynamics`).
ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class SimConfig:
    """Complete, reproducible description of a simulation study."""

    params: ModelParams
    policy: Policy
    phi: float | str
    horizon: int = 1_000_000
    warmup: int | None = None
    replications: int = 20
    seed: int = 12345
    fee: float | None = None

    def __post_init__(self) -> None:
        if isinstance(self.phi, str):
            if self.phi != ADAPTIVE:
                raise ValueError(f"phi must be a number or {ADAPTIVE!r}")
        elif not (0.0 <= self.phi <= 1.0):
            raise ValueError(f"phi must lie in [0, 1], got {self.phi!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be a positive completion count")
        warmup = self.resolved_warmup
        if not 0 <= warmup < self.horizon:
            raise ValueError(
                f"need 0 <= warmup < horizon, got {warmup} / {self.horizon}"
            )
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.fee is not None and not (math.isfinite(self.fee) and self.fee > 0):
            raise ValueError("fee must be a positive finite number")

    @property
    def resolved_warmup(self) -> int:
        return self.horizon // 10 if self.warmup is None else self.warmup

    def to_dict(self) -> dict:
        return {
            "lambda": self.params.lam,
            "mu": self.params.mu,
            "K": self.params.K,
            "policy": self.policy.value,
            "phi": self.phi,
            "horizon": self.horizon,
            "warmup": self.warmup,
            "replications": self.replications,
            "seed": self.seed,
            "fee": self.fee,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(
            params=ModelParams(d["lambda"], d["mu"], d["K"]),
            policy=Policy(d["policy"]),
            phi=d["phi"],
            horizon=d.get("horizon", 1_000_000),
            warmup=d.get("warmup"),
            replications=d.get("replications", 20),
            seed=d.get("seed", 12345),
            fee=d.get("fee"),
        )

    def rep_seeds(self) -> list[int]:
        state = np.random.SeedSequence(self.seed).generate_state(
            self.replications, dtype=np.uint64
        )
        return [int(s) for s in state]


def _worker_count(tasks: int) -> int:
    env = os.environ.get("QP_THREADS")
    if env is not None:
        workers = int(env)
        if workers < 1:
            raise ValueError("QP_THREADS must be a positive integer")
    else:
        workers = os.cpu_count() or 1
    return min(workers, tasks)


def replicate(config: SimConfig, phi: float | None = None) -> list[RepStats]:
    """Run all replications of ``config``; results are in seed order.

    ``phi`` overrides ``config.phi`` (used once dynamics has settled on a
    value); it must be given when the config says adaptive.
    """
    if phi is None:
        if config.phi == ADAPTIVE:
            raise ValueError("adaptive config needs an explicit phi to simulate")
        phi = float(config.phi)
    seeds = config.rep_seeds()
    warmup = config.resolved_warmup

    def one(seed: int) -> RepStats:
        return run_replication(
            config.params, config.policy, phi, config.horizon, warmup, seed
        )

    workers = _worker_count(len(seeds))
    if workers == 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, seeds))


@dataclass(frozen=True)
class Estimate:
    """Across-replication mean with a Student-t confidence half-width."""

    mean: float
    half_width: float
    confidence: float
    n: int

    @property
    def lo(self) -> float:
        return self.mean - self.half_width

    @property
    def hi(self) -> float:
        return self.mean + self.half_width

    def covers(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "half_width": self.half_width,
            "confidence": self.confidence,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Estimate":
        return cls(
            mean=d["mean"],
            half_width=d["half_width"],
            confidence=d["confidence"],
            n=d["n"],
        )


def _estimate(values: list[float], confidence: float) -> Estimate:
    n = len(values)
    mean = float(np.mean(values))
    if n < 2:
        return Estimate(mean=mean, half_width=math.nan, confidence=confidence, n=n)
    sem = float(np.std(values, ddof=1)) / math.sqrt(n)
    quantile = float(sps.t.ppf(0.5 * (1.0 + confidence), n - 1))
    return Estimate(mean=mean, half_width=quantile * sem, confidence=confidence, n=n)


@dataclass(frozen=True)
class SimulationResult:
    """Aggregated replication output next to its analytic counterparts.

    Estimates are ``None`` when some replication produced no observation of
    that quantity (for example no premium completions at ``phi == 0``).
    """

    config: SimConfig
    phi: float
    fee: float
    rep_seeds: tuple[int, ...]
    realized_phi: float
    wait_premium: Estimate | None
    wait_ordinary: Estimate | None
    wait_gap: Estimate | None
    welfare: Estimate
    revenue_rate: Estimate | None
    preemptions: int
    analytic_wait_premium: float
    analytic_wait_ordinary: float
    analytic_wait_gap: float
    analytic_welfare: float
    analytic_revenue_rate: float | None
    replications: tuple[RepStats, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        def est(e: Estimate | None) -> dict | None:
            return None if e is None else e.to_dict()

        return {
            "policy": self.config.policy.value,
            "lambda": self.config.params.lam,
            "mu": self.config.params.mu,
            "K": self.config.params.K,
            "rho": self.config.params.rho,
            "phi": self.phi,
            "fee": self.fee,
            "horizon": self.config.horizon,
            "warmup": self.config.resolved_warmup,
            "replications": self.config.replications,
            "seed": self.config.seed,
            "rep_seeds": list(self.rep_seeds),
            "realized_phi": self.realized_phi,
            "preemptions": self.preemptions,
            "estimates": {
                "wait_premium": est(self.wait_premium),
                "wait_ordinary": est(self.wait_ordinary),
                "wait_gap": est(self.wait_gap),
                "welfare": est(self.welfare),
                "revenue_rate": est(self.revenue_rate),
            },
            "analytic": {
                "wait_premium": self.analytic_wait_premium,
                "wait_ordinary": self.analytic_wait_ordinary,
                "wait_gap": self.analytic_wait_gap,
                "welfare": self.analytic_welfare,
                "revenue_rate": self.analytic_revenue_rate,
            },
        }


def _collect(values: list[float | None], confidence: float) -> Estimate | None:
    if any(v is None for v in values):
        return None
    return _estimate([float(v) for v in values], confidence)


def summarize(
    config: SimConfig,
    reps: list[RepStats],
    phi: float,
    confidence: float = 0.95,
) -> SimulationResult:
    """Fold per-replication tallies into estimates plus analytic values."""
    params = config.params
    if config.fee is not None:
        fee = config.fee
    else:
        fee = cost(params, config.policy, phi)

    wait_p = _collect([r.mean_wait_premium for r in reps], confidence)
    wait_o = _collect([r.mean_wait_ordinary for r in reps], confidence)
    gap = _collect([r.wait_gap for r in reps], confidence)
    welfare_est = _estimate([r.mean_wait_overall for r in reps], confidence)
    if fee > 0:
        revenue = _estimate(
            [fee * r.n_premium / r.window for r in reps], confidence
        )
    else:
        revenue = None

    w_p, w_o = wait_times(params, config.policy, phi)
    measured = sum(r.measured for r in reps)
    n_premium = sum(r.n_premium for r in reps)
    return SimulationResult(
        config=config,
        phi=phi,
        fee=fee,
        rep_seeds=tuple(config.rep_seeds()),
        realized_phi=n_premium / measured,
        wait_premium=wait_p,
        wait_ordinary=wait_o,
        wait_gap=gap,
        welfare=welfare_est,
        revenue_rate=revenue,
        preemptions=sum(r.preemptions for r in reps),
        analytic_wait_premium=w_p,
        analytic_wait_ordinary=w_o,
        analytic_wait_gap=w_o - w_p,
        analytic_welfare=phi * w_p + (1.0 - phi) * w_o,
        analytic_revenue_rate=params.lam * phi * fee if fee > 0 else None,
        replications=tuple(reps),
    )


def run_sim(config: SimConfig, confidence: float = 0.95) -> SimulationResult:
    """Run every replication of ``config`` and summarize the results."""
    if config.phi == ADAPTIVE:
        raise ValueError(
            "adaptive config: settle phi with adaptive_dynamics() first"
        )
    phi = float(config.phi)
    return summarize(config, replicate(config, phi), phi, confidence)


@dataclass(frozen=True)
class ValidationCheck:
    """One analytic quantity against its simulation confidence interval."""

    name: str
    analytic: float
    estimate: Estimate

    @property
    def passed(self) -> bool:
        return self.estimate.covers(self.analytic)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "analytic": self.analytic,
            "estimate": self.estimate.to_dict(),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking the closed forms against the simulator."""

    config: SimConfig
    result: SimulationResult
    checks: tuple[ValidationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "result": self.result.to_dict(),
        }


def validate(config: SimConfig, confidence: float = 0.99) -> ValidationReport:
    """Check each defined analytic quantity against its t-interval.

    Quantities with no observations (a class nobody joins) are skipped
    rather than failed.
    """
    result = run_sim(config, confidence)
    checks = []
    pairs = [
        ("wait_premium", result.analytic_wait_premium, result.wait_premium),
        ("wait_ordinary", result.analytic_wait_ordinary, result.wait_ordinary),
        ("wait_gap", result.analytic_wait_gap, result.wait_gap),
        ("welfare", result.analytic_welfare, result.welfare),
        ("revenue_rate", result.analytic_revenue_rate, result.revenue_rate),
    ]
    for name, analytic, estimate in pairs:
        if estimate is None or analytic is None:
            continue
        checks.append(ValidationCheck(name=name, analytic=analytic, estimate=estimate))
    return ValidationReport(config=config, result=result, checks=tuple(checks))
