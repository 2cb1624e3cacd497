"""Joint caching, routing and channel scheduling for cached small-cell networks."""

from .baseline import BaselineResult, baseline_schedule, baseline_throughput, femtocache_assign
from .colgen import (CgResult, NonConvergedError, Verdict, lower_bound, resolve_fixed_cache,
                     run_column_generation, verdict)
from .conflict import (ConflictGraph, IndependentSet, build_conflict_graph,
                       enumerate_independent_sets, is_independent, is_maximal)
from .lp import LpProblem, LpSolution, LpStatus, SolverError, solve_lp
from .master import InfeasibleError, Objective, RmpMode, RmpSolution, build_rmp, solve_rmp
from .model import (CommTuple, Scenario, ScenarioConfig, ScenarioError, enumerate_tuples,
                    generate_scenario, link_capacity, manual_scenario)
from .oracle import solve_full_lp
from .pricing import solve_pricing_exact, solve_pricing_sequential_fixing

__version__ = "0.1.0"

__all__ = [
    "BaselineResult", "baseline_schedule", "baseline_throughput", "femtocache_assign",
    "CgResult", "NonConvergedError", "Verdict", "lower_bound", "resolve_fixed_cache",
    "run_column_generation", "verdict", "ConflictGraph", "IndependentSet",
    "build_conflict_graph", "enumerate_independent_sets", "is_independent", "is_maximal",
    "LpProblem", "LpSolution", "LpStatus", "SolverError", "solve_lp", "InfeasibleError",
    "Objective", "RmpMode", "RmpSolution", "build_rmp", "solve_rmp", "CommTuple", "Scenario",
    "ScenarioConfig", "ScenarioError", "enumerate_tuples", "generate_scenario",
    "link_capacity", "manual_scenario", "solve_full_lp", "solve_pricing_exact",
    "solve_pricing_sequential_fixing",
]
