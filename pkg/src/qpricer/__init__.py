"""Priority pricing for an unobservable two-class M/G/1 queue.

Closed-form waiting times, upgrade-purchase equilibria, revenue-maximizing
fees, and social welfare under non-preemptive and preemptive-resume priority,
together with a discrete-event simulator that cross-checks every formula.
"""

from .equilibrium import (
    Equilibrium,
    EquilibriumKind,
    EquilibriumSet,
    equilibria,
    is_stable,
    some_join_np,
    some_join_pr,
)
from .model import (
    CostShape,
    ModelParams,
    Policy,
    ServiceDistribution,
    constant_cost_load,
    cost,
    cost_np,
    cost_pr,
    cost_shape_pr,
    make_service_distribution,
    wait_times,
)
from .revenue import (
    PolicyComparison,
    RevenueProfile,
    RevenueRegime,
    RevenueShape,
    compare_policies,
    max_revenue,
    phi_max,
    revenue,
    revenue_derivative_pr,
    revenue_shape_pr,
    unimodal_load_threshold,
)
from .sim import (
    ADAPTIVE,
    DynamicsTrace,
    SimConfig,
    SimulationResult,
    ValidationReport,
    adaptive_dynamics,
    run_sim,
    validate,
)
from .welfare import (
    PhiSet,
    WelfareProfile,
    socially_optimal,
    welfare,
    welfare_at_revenue_max,
)

__version__ = "0.1.0"

__all__ = [
    "ADAPTIVE",
    "CostShape",
    "DynamicsTrace",
    "Equilibrium",
    "EquilibriumKind",
    "EquilibriumSet",
    "ModelParams",
    "PhiSet",
    "Policy",
    "PolicyComparison",
    "RevenueProfile",
    "RevenueRegime",
    "RevenueShape",
    "ServiceDistribution",
    "SimConfig",
    "SimulationResult",
    "ValidationReport",
    "WelfareProfile",
    "adaptive_dynamics",
    "compare_policies",
    "constant_cost_load",
    "cost",
    "cost_np",
    "cost_pr",
    "cost_shape_pr",
    "equilibria",
    "is_stable",
    "make_service_distribution",
    "max_revenue",
    "phi_max",
    "revenue",
    "revenue_derivative_pr",
    "revenue_shape_pr",
    "run_sim",
    "socially_optimal",
    "some_join_np",
    "some_join_pr",
    "unimodal_load_threshold",
    "validate",
    "wait_times",
    "welfare",
    "welfare_at_revenue_max",
    "__version__",
]
