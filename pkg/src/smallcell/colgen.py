"""The epsilon-bounded column generation loop and its feasibility verdict."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, TextIO

import numpy as np

from .conflict import ConflictGraph, IndependentSet, is_independent
from .master import BIT_SCALE, Objective, RmpMode, RmpSolution, solve_rmp
from .model import ScenarioError
from .pricing import Pricer, PricingResult, solve_pricing_exact

BETA_TOL = 1e-9


class NonConvergedError(RuntimeError):
    pass


class Verdict(str, Enum):
    SUPPORTED = "supported"
    UNSUPPORTED = "unsupported"
    BORDERLINE = "borderline"


@dataclass
class IterationRecord:
    iteration: int
    delta_u: float
    delta_l: float
    beta_star: float
    pool_size: int
    ms: float


@dataclass
class CgResult:
    delta_u: float
    delta_l: float
    verdict: Verdict
    rmp: RmpSolution
    pool: list[IndependentSet]
    trace: list[IterationRecord] = field(default_factory=list)
    epsilon: float = 0.0
    stopped_by: str = ""
    exact_pricing: bool = True

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def X(self) -> np.ndarray:
        return self.rmp.X

    @property
    def Y(self) -> np.ndarray:
        return self.rmp.Y

    @property
    def Z(self) -> np.ndarray:
        return self.rmp.Z

    @property
    def f(self) -> np.ndarray:
        return self.rmp.f

    def schedule(self, tol: float = 1e-12) -> list[tuple[IndependentSet, float]]:
        """Active columns with their time fractions."""
        return [(col, float(v)) for col, v in zip(self.pool, self.rmp.f) if v > tol]

    def write_trace_csv(self, out: TextIO) -> None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iteration", "delta_u", "delta_l", "beta_star", "pool_size", "ms"])
        for r in self.trace:
            writer.writerow([r.iteration, f"{r.delta_u:.12g}", f"{r.delta_l:.12g}",
                             f"{r.beta_star:.12g}", r.pool_size, f"{r.ms:.3f}"])


def initial_pool(graph: ConflictGraph) -> list[IndependentSet]:
    """One singleton column per tuple (an identity incidence matrix)."""
    if len(graph) == 0:
        raise ScenarioError("no communication tuples: no user can be reached")
    return [IndependentSet((i,), len(graph)) for i in range(len(graph))]


def lower_bound(delta_u: float, omega: float, phi: float | None = None) -> float:
    """Lagrangian bound max(delta_u + phi * omega, 0).

    ``phi`` must dominate the optimal schedule length; the default
    ``max(1, delta_u)`` equals 1 whenever the demand fits in a slot.  A
    nonnegative ``omega`` certifies optimality, so the bound is then delta_u.
    """
    if phi is None:
        phi = max(1.0, delta_u)
    return max(delta_u + phi * min(omega, 0.0), 0.0)


def verdict(delta_u: float, delta_l: float, epsilon: float) -> Verdict:
    if delta_u <= 1.0:
        return Verdict.SUPPORTED
    if delta_u > 1.0 + epsilon or delta_l > 1.0:
        return Verdict.UNSUPPORTED
    return Verdict.BORDERLINE


def _ratio(delta_l: float, delta_u: float) -> float:
    return 1.0 if delta_u <= 0 else delta_l / delta_u


def _perturbed(duals: np.ndarray) -> np.ndarray:
    return duals * (1.0 + 1e-9 * np.arange(1, duals.size + 1))


def run_column_generation(graph: ConflictGraph, epsilon: float = 0.03,
                          mode: RmpMode = RmpMode(), pricer: Pricer = solve_pricing_exact,
                          *, pool: Sequence[IndependentSet] | None = None,
                          max_iterations: int | None = None,
                          rerun_exact: bool = False) -> CgResult:
    """Alternate master solves and pricing until the bounds meet within epsilon.

    Stops when delta_l / delta_u >= 1 / (1 + epsilon) or when pricing finds no
    column with beta > 1.  With the throughput objective the master is first
    made feasible by a schedule-length run, then priced against the dual of
    the one-slot row.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if mode.objective is Objective.MAX_THROUGHPUT:
        return _run_max_throughput(graph, epsilon, mode, pricer, pool, max_iterations)

    pool = list(initial_pool(graph) if pool is None else pool)
    seen = {col.members for col in pool}
    limit = max_iterations or 10 * max(len(graph), 1)
    exact = pricer is solve_pricing_exact
    delta_l = 0.0
    trace: list[IterationRecord] = []
    stopped_by = ""
    rmp = None
    target = 1.0 / (1.0 + epsilon)

    for it in range(1, limit + 1):
        t0 = time.perf_counter()
        rmp = solve_rmp(graph, pool, mode, validate=(it == 1))
        delta_u = rmp.objective
        priced = pricer(graph, rmp.duals)
        if priced.beta > 1.0 + BETA_TOL and priced.column.members in seen:
            # degenerate duals: perturb tie-breaking once, then give up
            priced = pricer(graph, _perturbed(rmp.duals))
            if priced.column.members in seen:
                stopped_by = "duplicate"
        delta_l = max(delta_l, lower_bound(delta_u, priced.omega))
        delta_l = min(delta_l, delta_u)
        done_pricing = priced.beta <= 1.0 + BETA_TOL
        if not done_pricing and not stopped_by:
            if not is_independent(priced.column, graph):
                raise RuntimeError("pricer returned a non-independent column")
            pool.append(priced.column)
            seen.add(priced.column.members)
        trace.append(IterationRecord(it, delta_u, delta_l, priced.beta, len(pool),
                                     1000.0 * (time.perf_counter() - t0)))
        if done_pricing:
            stopped_by = "pricing"
        elif _ratio(delta_l, delta_u) >= target:
            stopped_by = "ratio"
        if stopped_by:
            break
    else:
        raise NonConvergedError(f"no convergence within {limit} iterations "
                                f"(delta_u={trace[-1].delta_u:.6g}, delta_l={trace[-1].delta_l:.6g})")

    if stopped_by in ("ratio", "duplicate") and trace[-1].pool_size > len(rmp.f):
        # the last column was appended after the final master solve
        rmp = solve_rmp(graph, pool, mode, validate=False)
        delta_u = min(trace[-1].delta_u, rmp.objective)
    result = CgResult(delta_u=delta_u, delta_l=delta_l,
                      verdict=verdict(delta_u, delta_l, epsilon), rmp=rmp, pool=pool,
                      trace=trace, epsilon=epsilon, stopped_by=stopped_by, exact_pricing=exact)
    if result.verdict is Verdict.BORDERLINE and rerun_exact and epsilon > 0:
        exact_run = run_column_generation(graph, 0.0, mode, pricer, pool=pool,
                                          max_iterations=max_iterations)
        exact_run.trace = trace + exact_run.trace
        return exact_run
    return result


def _run_max_throughput(graph, epsilon, mode, pricer, pool, max_iterations) -> CgResult:
    schedule_mode = RmpMode(Objective.MIN_SCHEDULE, mode.fixed_cache, mode.routes)
    warm = run_column_generation(graph, 0.0, schedule_mode, pricer, pool=pool,
                                 max_iterations=max_iterations)
    if warm.delta_u > 1.0 + BETA_TOL:
        # no pool found that fits the demand into one slot
        warm.verdict = Verdict.UNSUPPORTED
        return warm
    pool = list(warm.pool)
    seen = {col.members for col in pool}
    limit = max_iterations or 10 * max(len(graph), 1)
    trace = list(warm.trace)
    upper = np.inf
    for it in range(1, limit + 1):
        t0 = time.perf_counter()
        rmp = solve_rmp(graph, pool, mode, validate=False)
        priced = pricer(graph, rmp.duals)
        mu = rmp.schedule_dual or 0.0
        # any column's time is at most 1, so the objective can grow by (beta - mu) at most
        gain = max(priced.beta - mu, 0.0)
        upper = min(upper, rmp.objective + gain * BIT_SCALE)
        trace.append(IterationRecord(len(trace) + 1, upper, rmp.objective, priced.beta,
                                     len(pool), 1000.0 * (time.perf_counter() - t0)))
        if priced.beta <= mu * (1.0 + BETA_TOL) + BETA_TOL or priced.column.members in seen:
            stopped_by = "pricing"
            break
        if rmp.objective >= upper / (1.0 + epsilon):
            pool.append(priced.column)
            stopped_by = "ratio"
            break
        pool.append(priced.column)
        seen.add(priced.column.members)
    else:
        raise NonConvergedError(f"no convergence within {limit} iterations")
    rmp = solve_rmp(graph, pool, mode, validate=False)
    return CgResult(delta_u=upper, delta_l=rmp.objective, verdict=Verdict.SUPPORTED, rmp=rmp,
                    pool=pool, trace=trace, epsilon=epsilon, stopped_by=stopped_by,
                    exact_pricing=pricer is solve_pricing_exact)


def resolve_fixed_cache(graph: ConflictGraph, fixed_cache: np.ndarray, epsilon: float = 0.03,
                        pricer: Pricer = solve_pricing_exact, **kwargs) -> CgResult:
    """Re-run the loop with cache placement held constant (routing and scheduling only)."""
    scenario = graph.scenario
    fixed = np.asarray(fixed_cache, dtype=float)
    if fixed.shape != (len(scenario.transmitters), scenario.n_files):
        raise ValueError("fixed cache must be (transmitters x files)")
    if (fixed < -1e-12).any() or (fixed > 1 + 1e-12).any():
        raise ValueError("cache fractions must lie in [0, 1]")
    sizes = np.asarray(scenario.catalog.sizes_bits)
    for n in scenario.sbs:
        used = float(fixed[n] @ sizes)
        cap = scenario.transmitters[n].cache_bits
        if used > cap * (1 + 1e-9) + 1e-6:
            raise ValueError(f"{scenario.transmitters[n].name}: cached {used:.6g} bits exceeds {cap:.6g}")
    return run_column_generation(graph, epsilon, RmpMode(fixed_cache=np.clip(fixed, 0.0, 1.0)),
                                 pricer, **kwargs)
