"""Event-driven core of the two-class single-server queue.

One replication simulates Poisson arrivals that join the premium class with
probability phi, draw service from the moment-matched family, and are served
highest-class-first (FCFS within class). Under NP an in-service customer is
never interrupted; under PR an arriving premium customer suspends an
in-service ordinary one, whose remaining work resumes at the head of the
ordinary queue with nothing lost.

A customer's wait is (departure - arrival - total own service received); the
sampled service time is recovered in full by departure, so under PR the wait
includes time suspended by preemptions. The first ``warmup`` completions are
discarded; waits and waiting-count integrals are measured over the window
from the warmup-th to the horizon-th completion.

Randomness is fully precomputed from three independent substreams (arrival,
class choice, service) of the replication seed, so changing phi or the policy
perturbs neither arrival times nor service draws (common random numbers),
and identical (config, seed) replays bit-identically. The hot loop is
compiled with numba; ``nogil`` lets replications run on real threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..model import ModelParams, Policy, make_service_distribution

__all__ = ["RepStats", "SimulationError", "run_replication"]

# Status codes reported by the compiled core.
_OK = 0
_EXHAUSTED = 1  # precomputed arrivals ran out before `horizon` completions
_NEGATIVE_WORK = 2
_WORK_MISMATCH = 3
_BUSY_PREMIUM_PREEMPT = 4  # ordinary in service while premium queue non-empty
_NEGATIVE_WAIT = 5  # departure earlier than arrival + own service


class SimulationError(RuntimeError):
    """Internal consistency failure inside the event loop."""


@dataclass(frozen=True)
class RepStats:
    """Post-warmup tallies of one replication."""

    rep_seed: int
    completed: int
    n_premium: int
    n_ordinary: int
    wait_sum_premium: float
    wait_sum_ordinary: float
    area_premium: float
    area_ordinary: float
    window: float
    preemptions: int

    @property
    def measured(self) -> int:
        return self.n_premium + self.n_ordinary

    @property
    def realized_phi(self) -> float:
        return self.n_premium / self.measured

    @property
    def mean_wait_premium(self) -> float | None:
        if self.n_premium == 0:
            return None
        return self.wait_sum_premium / self.n_premium

    @property
    def mean_wait_ordinary(self) -> float | None:
        if self.n_ordinary == 0:
            return None
        return self.wait_sum_ordinary / self.n_ordinary

    @property
    def wait_gap(self) -> float | None:
        if self.n_premium == 0 or self.n_ordinary == 0:
            return None
        return self.mean_wait_ordinary - self.mean_wait_premium

    @property
    def mean_wait_overall(self) -> float:
        return (self.wait_sum_premium + self.wait_sum_ordinary) / self.measured


@njit(cache=True, nogil=True)
def _run_core(arrivals, services, premium, horizon, warmup, preemptive):
    """Sequential event loop; returns (status, tallies...).

    Ties between a completion and an arrival at the same instant resolve in
    favor of the completion, which both fixes the event order for
    reproducibility and guarantees preempted work is strictly positive.
    """
    n = arrivals.shape[0]
    rem = services.copy()  # remaining work, updated on preemption
    served = np.zeros(n)  # accumulated service actually received
    # FIFO queues of customer indices. Preemption re-inserts at the head of
    # the ordinary queue, which moves the head left at most one slot below
    # its starting offset, hence the +2 slack and head offset 1.
    q_prem = np.empty(n + 2, np.int64)
    q_ord = np.empty(n + 2, np.int64)
    qp_head = qp_tail = 1
    qo_head = qo_tail = 1

    serving = -1
    completion = np.inf
    seg_start = 0.0
    now = 0.0
    next_idx = 0
    completed = 0
    preemptions = 0

    measuring = warmup == 0
    meas_start = 0.0
    meas_end = 0.0
    n_p = 0
    n_o = 0
    wsum_p = 0.0
    wsum_o = 0.0
    area_p = 0.0
    area_o = 0.0

    while completed < horizon:
        next_arrival = arrivals[next_idx] if next_idx < n else np.inf
        if completion == np.inf and next_arrival == np.inf:
            return (_EXHAUSTED, completed, n_p, n_o, wsum_p, wsum_o,
                    area_p, area_o, meas_start, meas_end, preemptions)

        if completion <= next_arrival:
            event_time = completion
        else:
            event_time = next_arrival
        if measuring:
            dt = event_time - now
            area_p += (qp_tail - qp_head) * dt
            area_o += (qo_tail - qo_head) * dt
        now = event_time

        if completion <= next_arrival:
            # Service completion.
            cust = serving
            served[cust] += now - seg_start
            err = served[cust] - services[cust]
            if err < 0.0:
                err = -err
            # Rounding in (seg_start + rem) - seg_start scales with the
            # absolute clock, so the tolerance must too; a genuinely lost or
            # duplicated service segment is orders of magnitude larger.
            if err > 1e-9 * services[cust] + 1e-12 * (1.0 + now):
                return (_WORK_MISMATCH, completed, n_p, n_o, wsum_p, wsum_o,
                        area_p, area_o, meas_start, meas_end, preemptions)
            completed += 1
            if completed > warmup:
                wait = now - arrivals[cust] - services[cust]
                if wait < -1e-6:
                    return (_NEGATIVE_WAIT, completed, n_p, n_o,
                            wsum_p, wsum_o, area_p, area_o,
                            meas_start, meas_end, preemptions)
                if premium[cust]:
                    wsum_p += wait
                    n_p += 1
                else:
                    wsum_o += wait
                    n_o += 1
            if completed == warmup:
                measuring = True
                meas_start = now
            if completed == horizon:
                meas_end = now
                break
            if qp_tail > qp_head:
                serving = q_prem[qp_head]
                qp_head += 1
            elif qo_tail > qo_head:
                serving = q_ord[qo_head]
                qo_head += 1
            else:
                serving = -1
            if serving >= 0:
                seg_start = now
                completion = now + rem[serving]
            else:
                completion = np.inf
        else:
            # Arrival of customer next_idx.
            cust = next_idx
            next_idx += 1
            if serving < 0:
                serving = cust
                seg_start = now
                completion = now + rem[cust]
            elif preemptive and premium[cust] and not premium[serving]:
                if qp_tail > qp_head:
                    return (_BUSY_PREMIUM_PREEMPT, completed, n_p, n_o,
                            wsum_p, wsum_o, area_p, area_o,
                            meas_start, meas_end, preemptions)
                remaining = completion - now
                if remaining < 0.0:
                    return (_NEGATIVE_WORK, completed, n_p, n_o,
                            wsum_p, wsum_o, area_p, area_o,
                            meas_start, meas_end, preemptions)
                served[serving] += now - seg_start
                rem[serving] = remaining
                qo_head -= 1
                q_ord[qo_head] = serving
                preemptions += 1
                serving = cust
                seg_start = now
                completion = now + rem[cust]
            elif premium[cust]:
                q_prem[qp_tail] = cust
                qp_tail += 1
            else:
                q_ord[qo_tail] = cust
                qo_tail += 1

    return (_OK, completed, n_p, n_o, wsum_p, wsum_o,
            area_p, area_o, meas_start, meas_end, preemptions)


def _draw_inputs(params: ModelParams, phi: float, n: int, rep_seed: int):
    """Precompute arrival times, class choices, and services for one rep.

    Drawing from fresh substreams each call means a retry with a larger n
    reproduces the same prefix, preserving common random numbers.
    """
    root = np.random.SeedSequence(rep_seed)
    ss_arrival, ss_class, ss_service = root.spawn(3)
    arrivals = np.cumsum(
        np.random.default_rng(ss_arrival).exponential(1.0 / params.lam, n)
    )
    premium = np.random.default_rng(ss_class).random(n) < phi
    dist = make_service_distribution(params.mu, params.K)
    services = dist.sample(np.random.default_rng(ss_service), n)
    return arrivals, premium, services


def run_replication(
    params: ModelParams,
    policy: Policy,
    phi: float,
    horizon: int,
    warmup: int,
    rep_seed: int,
) -> RepStats:
    """Run one replication to ``horizon`` completions and tally statistics."""
    if not 0 <= warmup < horizon:
        raise ValueError(f"need 0 <= warmup < horizon, got {warmup} / {horizon}")
    # Enough arrivals to cover the backlog still in system at the end; the
    # retry loop handles the rare deep excursion.
    n = horizon + max(1000, horizon // 16)
    while True:
        arrivals, premium, services = _draw_inputs(params, phi, n, rep_seed)
        out = _run_core(
            arrivals, services, premium, horizon, warmup, policy is Policy.PR
        )
        status = out[0]
        if status == _EXHAUSTED:
            n *= 2
            continue
        if status == _NEGATIVE_WORK:
            raise SimulationError("negative remaining work detected at a preemption")
        if status == _WORK_MISMATCH:
            raise SimulationError(
                "served work does not match the sampled service time"
            )
        if status == _BUSY_PREMIUM_PREEMPT:
            raise SimulationError(
                "ordinary customer in service while premium queue non-empty"
            )
        if status == _NEGATIVE_WAIT:
            raise SimulationError("customer departed before arrival + own service")
        (_, completed, n_p, n_o, wsum_p, wsum_o,
         area_p, area_o, meas_start, meas_end, preemptions) = out
        return RepStats(
            rep_seed=rep_seed,
            completed=completed,
            n_premium=n_p,
            n_ordinary=n_o,
            wait_sum_premium=wsum_p,
            wait_sum_ordinary=wsum_o,
            area_premium=area_p,
            area_ordinary=area_o,
            window=meas_end - meas_start,
            preemptions=preemptions,
        )
