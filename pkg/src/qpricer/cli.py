"""Command-line interface: analyze, optimize, sweep, simulate.

Exit codes: 0 success, 2 usage or parameter error, 3 a simulation validation
check failed. Human-readable numbers carry 9 significant digits; JSON output
keeps full precision so reports re-parse losslessly.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from .equilibrium import equilibria
from .model import (
    CostShape,
    ModelParams,
    Policy,
    constant_cost_load,
    cost,
    cost_shape_pr,
)
from .revenue import RevenueRegime, max_revenue, revenue_shape_pr, unimodal_load_threshold
from .sim.dynamics import adaptive_dynamics
from .sim.runner import ADAPTIVE, SimConfig, validate
from .welfare import welfare, welfare_at_revenue_max

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3

_SWEEP_COLUMNS = """\
CSV columns by quantity (UTF-8, comma-separated, '.' decimal, header row;
rows ordered K-major then rho):
  cost-shape     K, rho, policy, shape, knife_edge_load
                 shape of the upgrade-benefit curve (increasing | constant |
                 decreasing); knife_edge_load = (K-2)/(2K-2), nan for K <= 2.
  revenue-regime K, rho, policy, regime, unimodal_load_threshold, phi_star,
                 fee_star, revenue_star
                 regime (increasing | unimodal); threshold nan for K <= 4.
  rstar          K, rho, rstar_np, rstar_pr, difference
                 maximum revenue under both policies (difference > 0 always).
  welfare-gap    K, rho, policy, phi_revenue_max, welfare_at_revenue_max,
                 optimal_phi_set, optimal_welfare, welfare_gap
                 optimal_phi_set is 'all' when every phi is optimal, else
                 ';'-joined phi values."""


def _fmt(x) -> str:
    """Human-readable scalar: 9 significant digits for floats."""
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return "%.9g" % x
    return str(x)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _emit_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(payload, indent=2), out)


def _params_from_args(args) -> ModelParams:
    if args.lam is None or args.mu is None or args.K is None:
        raise ValueError("--lambda, --mu and --K are required")
    return ModelParams(args.lam, args.mu, args.K)


def _policy_from_args(args) -> Policy:
    if args.policy is None:
        raise ValueError("--policy {np|pr} is required")
    return Policy(args.policy)


def cmd_analyze(args) -> int:
    params = _params_from_args(args)
    policy = _policy_from_args(args)
    if args.fee is None:
        raise ValueError("--fee is required")
    eq_set = equilibria(params, policy, args.fee)
    shape = (
        CostShape.MONOTONE_INCREASING if policy is Policy.NP else cost_shape_pr(params)
    )
    c0 = cost(params, policy, 0.0)
    c1 = cost(params, policy, 1.0)

    if args.json:
        payload = {
            "command": "analyze",
            "lambda": params.lam,
            "mu": params.mu,
            "K": params.K,
            "rho": params.rho,
            "policy": policy.value,
            "fee": args.fee,
            "cost_at_zero": c0,
            "cost_at_one": c1,
            "cost_shape": shape.value,
            "equilibria": [
                {"kind": eq.kind.value, "phi": eq.phi, "stable": eq.stable}
                for eq in eq_set.equilibria
            ],
        }
        _emit_json(payload, args.out)
        return EXIT_OK

    lines = [
        f"policy={policy.value} lambda={_fmt(params.lam)} mu={_fmt(params.mu)} "
        f"K={_fmt(params.K)} rho={_fmt(params.rho)} fee={_fmt(args.fee)}",
        f"upgrade benefit: cost(0)={_fmt(c0)} cost(1)={_fmt(c1)} shape={shape.value}",
        "equilibria:",
    ]
    for eq in eq_set.equilibria:
        stability = "stable" if eq.stable else "unstable"
        phi = "all phi in [0,1]" if eq.phi is None else f"phi={_fmt(eq.phi)}"
        lines.append(f"  {eq.kind.value:<9} {phi} ({stability})")
    _emit("\n".join(lines), args.out)
    return EXIT_OK


def _profile_dict(params: ModelParams, policy: Policy, epsilon: float) -> dict:
    profile = max_revenue(params, policy)
    fee = profile.fee_star
    revenue_star = profile.revenue_star
    if epsilon and profile.phi_star == 1.0:
        # Margin below the boundary fee so joining is strictly preferred.
        fee -= epsilon
        if fee <= 0.0:
            raise ValueError(f"epsilon {epsilon} leaves no positive fee")
        revenue_star = params.lam * profile.phi_star * fee
    return {
        "policy": policy.value,
        "regime": profile.shape.regime.value,
        "phi_star": profile.phi_star,
        "fee_star": fee,
        "revenue_star": revenue_star,
        "stable": profile.stable,
        "welfare_at_optimum": welfare(params, policy, profile.phi_star),
    }


def cmd_optimize(args) -> int:
    params = _params_from_args(args)
    if args.epsilon < 0:
        raise ValueError("--epsilon must be non-negative")

    if args.compare:
        prof_np = _profile_dict(params, Policy.NP, args.epsilon)
        prof_pr = _profile_dict(params, Policy.PR, args.epsilon)
        difference = prof_pr["revenue_star"] - prof_np["revenue_star"]
        payload = {
            "command": "optimize",
            "lambda": params.lam,
            "mu": params.mu,
            "K": params.K,
            "rho": params.rho,
            "profiles": {"np": prof_np, "pr": prof_pr},
            "difference": difference,
        }
        profiles = [prof_np, prof_pr]
    else:
        policy = _policy_from_args(args)
        profile = _profile_dict(params, policy, args.epsilon)
        payload = {
            "command": "optimize",
            "lambda": params.lam,
            "mu": params.mu,
            "K": params.K,
            "rho": params.rho,
            "profiles": {policy.value: profile},
        }
        profiles = [profile]

    if args.json:
        _emit_json(payload, args.out)
        return EXIT_OK

    lines = [
        f"lambda={_fmt(params.lam)} mu={_fmt(params.mu)} "
        f"K={_fmt(params.K)} rho={_fmt(params.rho)}"
    ]
    for prof in profiles:
        lines.append(
            f"policy={prof['policy']} regime={prof['regime']} "
            f"phi_star={_fmt(prof['phi_star'])} fee_star={_fmt(prof['fee_star'])} "
            f"revenue_star={_fmt(prof['revenue_star'])} "
            f"stable={_fmt(prof['stable'])} "
            f"welfare_at_optimum={_fmt(prof['welfare_at_optimum'])}"
        )
    if args.compare:
        lines.append(f"difference (pr - np): {_fmt(payload['difference'])}")
    _emit("\n".join(lines), args.out)
    return EXIT_OK


def _grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError("range end must not precede its start")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _sweep_rows(args):
    policy = Policy(args.policy) if args.policy else Policy.PR
    mu = args.mu if args.mu is not None else 1.0
    ks = _grid(args.k_min, args.k_max, args.k_step)
    rhos = _grid(args.rho_min, args.rho_max, args.rho_step)
    if any(k < 1 for k in ks):
        raise ValueError("K range must stay within K >= 1")
    if any(not 0 < r < 1 for r in rhos):
        raise ValueError("rho range must stay within (0, 1)")

    if args.quantity == "cost-shape":
        header = ["K", "rho", "policy", "shape", "knife_edge_load"]
    elif args.quantity == "revenue-regime":
        header = [
            "K", "rho", "policy", "regime", "unimodal_load_threshold",
            "phi_star", "fee_star", "revenue_star",
        ]
    elif args.quantity == "rstar":
        header = ["K", "rho", "rstar_np", "rstar_pr", "difference"]
    else:
        header = [
            "K", "rho", "policy", "phi_revenue_max", "welfare_at_revenue_max",
            "optimal_phi_set", "optimal_welfare", "welfare_gap",
        ]
    yield header

    for k in ks:
        for rho in rhos:
            params = ModelParams(rho * mu, mu, k)
            if args.quantity == "cost-shape":
                shape = (
                    CostShape.MONOTONE_INCREASING
                    if policy is Policy.NP
                    else cost_shape_pr(params)
                )
                yield [
                    _fmt(k), _fmt(rho), policy.value, shape.value,
                    _fmt(constant_cost_load(k)),
                ]
            elif args.quantity == "revenue-regime":
                if policy is Policy.NP:
                    regime = RevenueRegime.MONOTONE_INCREASING
                else:
                    regime = revenue_shape_pr(params).regime
                profile = max_revenue(params, policy)
                yield [
                    _fmt(k), _fmt(rho), policy.value, regime.value,
                    _fmt(unimodal_load_threshold(k)),
                    _fmt(profile.phi_star), _fmt(profile.fee_star),
                    _fmt(profile.revenue_star),
                ]
            elif args.quantity == "rstar":
                rstar_np = max_revenue(params, Policy.NP).revenue_star
                rstar_pr = max_revenue(params, Policy.PR).revenue_star
                yield [
                    _fmt(k), _fmt(rho), _fmt(rstar_np), _fmt(rstar_pr),
                    _fmt(rstar_pr - rstar_np),
                ]
            else:
                prof = welfare_at_revenue_max(params, policy)
                if prof.optimal_states.whole_interval:
                    phi_set = "all"
                else:
                    phi_set = ";".join(_fmt(p) for p in prof.optimal_states.points)
                yield [
                    _fmt(k), _fmt(rho), policy.value,
                    _fmt(prof.phi_revenue_max),
                    _fmt(prof.welfare_at_revenue_max),
                    phi_set,
                    _fmt(prof.optimal_welfare),
                    _fmt(prof.welfare_at_revenue_max - prof.optimal_welfare),
                ]


def cmd_sweep(args) -> int:
    rows = list(_sweep_rows(args))
    if args.out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerows(rows)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    return EXIT_OK


def _simulate_config(args) -> SimConfig:
    merged = {
        "horizon": 1_000_000,
        "replications": 20,
        "seed": 12345,
        "warmup": None,
        "fee": None,
    }
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ValueError("config document must be a JSON object")
        merged.update(doc)
    overrides = {
        "lambda": args.lam,
        "mu": args.mu,
        "K": args.K,
        "policy": args.policy,
        "phi": args.phi,
        "fee": args.fee,
        "seed": args.seed,
        "replications": args.reps,
        "horizon": args.horizon,
        "warmup": args.warmup,
    }
    merged.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("lambda", "mu", "K", "policy"):
        if key not in merged or merged[key] is None:
            raise ValueError(f"simulate needs '{key}' from flags or --config")
    if args.dynamics:
        merged["phi"] = ADAPTIVE
    elif "phi" not in merged or merged["phi"] is None:
        raise ValueError("simulate needs '--phi' (or a config value)")
    return SimConfig.from_dict(merged)


def cmd_simulate(args) -> int:
    config = _simulate_config(args)

    if args.dynamics:
        phi0 = args.phi if isinstance(args.phi, float) else 0.5
        trace = adaptive_dynamics(
            config,
            phi0,
            rounds=args.rounds,
            step=args.step,
            empirical=args.empirical,
        )
        payload = {
            "command": "simulate",
            "config": config.to_dict(),
            "phi0": phi0,
            "dynamics": trace.to_dict(),
        }
        _emit_json(payload, args.out)
        return EXIT_OK

    report = validate(config)
    payload = {
        "command": "simulate",
        "config": config.to_dict(),
        **report.to_dict(),
    }
    _emit_json(payload, args.out)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _float_or_adaptive(text: str):
    if text == ADAPTIVE:
        return ADAPTIVE
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpricer",
        description=(
            "Priority pricing in a two-class unobservable M/G/1 queue: "
            "equilibria, revenue-optimal fees, welfare, and simulation checks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p: argparse.ArgumentParser, with_policy: bool = True):
        p.add_argument("--lambda", dest="lam", type=float, help="arrival rate")
        p.add_argument("--mu", type=float, help="service rate")
        p.add_argument(
            "--K", type=float,
            help="normalized second service moment, E[S^2] = K / mu^2 (K >= 1)",
        )
        if with_policy:
            p.add_argument(
                "--policy", choices=[pol.value for pol in Policy],
                help="priority policy: np (non-preemptive) or pr (preemptive-resume)",
            )
        p.add_argument("--out", help="write output to this path instead of stdout")

    p_analyze = sub.add_parser(
        "analyze", help="equilibrium set and benefit-curve endpoints at a fee"
    )
    add_model_flags(p_analyze)
    p_analyze.add_argument("--fee", type=float, help="posted upgrade fee (> 0)")
    p_analyze.add_argument("--json", action="store_true", help="emit JSON")
    p_analyze.set_defaults(func=cmd_analyze)

    p_opt = sub.add_parser(
        "optimize", help="revenue-maximizing fraction, fee, and revenue"
    )
    add_model_flags(p_opt)
    p_opt.add_argument(
        "--compare", action="store_true",
        help="report both policies and the PR - NP revenue difference",
    )
    p_opt.add_argument(
        "--epsilon", type=float, default=0.0,
        help="margin subtracted from a boundary optimum fee so joining is "
        "strictly preferred (default 0)",
    )
    p_opt.add_argument("--json", action="store_true", help="emit JSON")
    p_opt.set_defaults(func=cmd_optimize)

    p_sweep = sub.add_parser(
        "sweep",
        help="classify regimes / tabulate optima over a (K, rho) grid as CSV",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_SWEEP_COLUMNS,
    )
    p_sweep.add_argument(
        "--quantity",
        choices=["cost-shape", "revenue-regime", "rstar", "welfare-gap"],
        required=True,
        help="which classification/surface to tabulate",
    )
    p_sweep.add_argument("--k-min", type=float, default=1.0)
    p_sweep.add_argument("--k-max", type=float, default=20.0)
    p_sweep.add_argument("--k-step", type=float, default=1.0)
    p_sweep.add_argument("--rho-min", type=float, default=0.05)
    p_sweep.add_argument("--rho-max", type=float, default=0.95)
    p_sweep.add_argument("--rho-step", type=float, default=0.05)
    p_sweep.add_argument(
        "--policy", choices=[pol.value for pol in Policy],
        help="policy for policy-specific quantities (default pr)",
    )
    p_sweep.add_argument(
        "--mu", type=float, help="service rate for dimensional quantities (default 1)"
    )
    p_sweep.add_argument("--out", help="CSV output path (default stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser(
        "simulate",
        help="validate closed forms by simulation, or run adaptive dynamics",
    )
    add_model_flags(p_sim)
    p_sim.add_argument(
        "--phi", type=_float_or_adaptive,
        help="premium fraction in [0, 1]; with --dynamics, the starting point",
    )
    p_sim.add_argument("--fee", type=float, help="posted fee (defaults to cost(phi))")
    p_sim.add_argument("--seed", type=int, help="master seed (default 12345)")
    p_sim.add_argument(
        "--reps", type=int, help="independent replications (default 20)"
    )
    p_sim.add_argument(
        "--horizon", type=int, help="completions per replication (default 1000000)"
    )
    p_sim.add_argument(
        "--warmup", type=int, help="completions discarded (default horizon/10)"
    )
    p_sim.add_argument(
        "--config", help="JSON file with the same keys; flags override it"
    )
    p_sim.add_argument(
        "--dynamics", action="store_true",
        help="run adaptive best-response dynamics and emit the phi trajectory",
    )
    p_sim.add_argument(
        "--rounds", type=int, default=2000, help="dynamics round budget"
    )
    p_sim.add_argument(
        "--step", type=float, default=0.5, help="dynamics gain in (0, 1]"
    )
    p_sim.add_argument(
        "--empirical", action="store_true",
        help="dynamics estimates the benefit by short simulations",
    )
    p_sim.add_argument(
        "--json", action="store_true",
        help="accepted for symmetry; simulate output is always JSON",
    )
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
