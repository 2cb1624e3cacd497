"""Restricted master problem over a pool of independent sets.

Variable blocks, in order: cache fractions X (SBS x file), routing fractions
Y (transmitter x user x file), per-tuple transfers Z, and one activity
fraction f per pool column.  Bits are expressed in megabits inside the LP to
keep coefficients well scaled; results are reported in bits.

Pruning: X exists only for files some reachable user requests, Y only for
(transmitter, user) pairs linked by at least one tuple and for requested
files, and (in the schedule objective) Z only for tuples whose pair carries Y.
Everything pruned is forced to zero in the unpruned model anyway.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import TextIO

import numpy as np

from .conflict import ConflictGraph, IndependentSet, is_independent
from .lp import LpProblem, LpSolution, LpStatus, solve_lp

BIT_SCALE = 1e6


class Objective(str, Enum):
    MIN_SCHEDULE = "min_schedule"
    MAX_THROUGHPUT = "max_throughput"


class InfeasibleError(RuntimeError):
    """The master LP has no feasible point; ``reason`` says why."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class RmpMode:
    objective: Objective = Objective.MIN_SCHEDULE
    # (transmitters x files) cache fractions; the MBS row is ignored
    fixed_cache: np.ndarray | None = None
    # optional (user, file) -> transmitter restriction of the routing
    routes: Mapping[tuple[int, int], int] | None = None

    @property
    def free_cache(self) -> bool:
        return self.fixed_cache is None


@dataclass
class RmpModel:
    problem: LpProblem
    x_index: dict[tuple[int, int], int]
    y_index: dict[tuple[int, int, int], int]
    z_index: dict[int, int]
    f_offset: int
    tuple_rows: dict[int, int]
    demand_rows: dict[tuple[int, int], int]
    schedule_row: int | None

    @property
    def counts(self) -> dict[str, int]:
        return {"X": len(self.x_index), "Y": len(self.y_index), "Z": len(self.z_index),
                "f": self.problem.c.size - self.f_offset}


@dataclass
class RmpSolution:
    objective: float
    schedule_length: float
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    f: np.ndarray
    duals: np.ndarray
    schedule_dual: float | None = None
    lp_iterations: int = 0
    model: RmpModel | None = field(default=None, repr=False)


def _reach(graph: ConflictGraph) -> dict[int, list[int]]:
    out: dict[int, set[int]] = {}
    for t in graph.tuples:
        out.setdefault(t.rx, set()).add(t.tx)
    return {k: sorted(v) for k, v in out.items()}


def build_rmp(graph: ConflictGraph, pool: Sequence[IndependentSet], mode: RmpMode = RmpMode(),
              validate: bool = True) -> RmpModel:
    scenario = graph.scenario
    if not pool:
        raise ValueError("the column pool is empty")
    if validate:
        for col in pool:
            if not is_independent(col, graph):
                raise ValueError(f"pool column {col.members} is not independent")
    mbs = scenario.mbs
    sizes = np.asarray(scenario.catalog.sizes_bits) / BIT_SCALE
    alpha = scenario.requests
    reach = _reach(graph)
    demanded = [(int(k), int(j)) for k, j in zip(*np.nonzero(alpha > 0))]
    if mode.fixed_cache is not None:
        fixed = np.asarray(mode.fixed_cache, dtype=float)
        if fixed.shape != (len(scenario.transmitters), scenario.n_files):
            raise ValueError("fixed cache must be (transmitters x files)")

    def allowed(n: int, k: int, j: int) -> bool:
        return mode.routes is None or mode.routes.get((k, j)) == n

    names: list[str] = []
    lower: list[float] = []
    upper: list[float] = []

    def new_var(name: str, ub: float) -> int:
        names.append(name)
        lower.append(0.0)
        upper.append(ub)
        return len(names) - 1

    x_index: dict[tuple[int, int], int] = {}
    if mode.free_cache:
        wanted = sorted({(n, j) for k, j in demanded for n in reach.get(k, ())
                         if n != mbs and allowed(n, k, j)})
        for n, j in wanted:
            x_index[(n, j)] = new_var(f"X_{n}_{j}", 1.0)

    y_index: dict[tuple[int, int, int], int] = {}
    for k, j in demanded:
        for n in reach.get(k, ()):
            if not allowed(n, k, j):
                continue
            ub = 1.0
            if n != mbs and not mode.free_cache:
                ub = min(1.0, float(fixed[n, j]))
                if ub <= 0:
                    continue
            y_index[(n, k, j)] = new_var(f"Y_{n}_{k}_{j}", ub)

    pairs = sorted({(n, k) for n, k, _ in y_index})
    pair_set = set(pairs)
    z_index: dict[int, int] = {}
    for t_idx, t in enumerate(graph.tuples):
        if mode.objective is Objective.MAX_THROUGHPUT or (t.tx, t.rx) in pair_set:
            z_index[t_idx] = new_var(f"Z_{t.tx}_{t.rx}_{t.channel}", np.inf)

    f_offset = len(names)
    for i, _ in enumerate(pool):
        new_var(f"f_{i}", np.inf)

    n_vars = len(names)
    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []
    row_names: list[str] = []

    def add_row(coefs: dict[int, float], sense: str, b: float, name: str) -> int:
        row = np.zeros(n_vars)
        for v, a in coefs.items():
            row[v] += a
        rows.append(row)
        senses.append(sense)
        rhs.append(b)
        row_names.append(name)
        return len(rows) - 1

    # (1) cache capacity per SBS
    if mode.free_cache:
        by_sbs: dict[int, dict[int, float]] = {}
        for (n, j), v in x_index.items():
            by_sbs.setdefault(n, {})[v] = sizes[j]
        for n, coefs in sorted(by_sbs.items()):
            add_row(coefs, "<=", scenario.transmitters[n].cache_bits / BIT_SCALE, f"cap_{n}")

    # (2) every requested file is fully delivered
    demand_rows = {}
    for k, j in demanded:
        coefs = {v: 1.0 for (n, kk, jj), v in y_index.items() if kk == k and jj == j}
        demand_rows[(k, j)] = add_row(coefs, ">=", 1.0, f"dem_{k}_{j}")

    # (3) serve only cached content
    if mode.free_cache:
        for (n, k, j), v in y_index.items():
            if n != mbs:
                add_row({v: 1.0, x_index[(n, j)]: -1.0}, "<=", 0.0, f"link_{n}_{k}_{j}")

    # (4) routed bits fit in the pair's transfers
    pair_rows: dict[tuple[int, int], dict[int, float]] = {p: {} for p in pairs}
    for (n, k, j), v in y_index.items():
        pair_rows[(n, k)][v] = alpha[k, j] * sizes[j]
    for t_idx, v in z_index.items():
        t = graph.tuples[t_idx]
        if (t.tx, t.rx) in pair_rows:
            pair_rows[(t.tx, t.rx)][v] = -1.0
    for (n, k), coefs in pair_rows.items():
        add_row(coefs, "<=", 0.0, f"flow_{n}_{k}")

    # (7) transfers bounded by scheduled capacity; written as >= so duals are >= 0
    caps = graph.capacities / BIT_SCALE
    tuple_rows = {}
    for t_idx, v in z_index.items():
        coefs = {v: -1.0}
        for i, col in enumerate(pool):
            if t_idx in col:
                coefs[f_offset + i] = caps[t_idx]
        tuple_rows[t_idx] = add_row(coefs, ">=", 0.0, f"cap_t{t_idx}")

    schedule_row = None
    c = np.zeros(n_vars)
    if mode.objective is Objective.MIN_SCHEDULE:
        c[f_offset:] = 1.0
        maximize = False
    else:
        for v in z_index.values():
            c[v] = 1.0
        schedule_row = add_row({f_offset + i: 1.0 for i in range(len(pool))}, "<=", 1.0, "schedule")
        maximize = True

    A = np.vstack(rows) if rows else np.zeros((0, n_vars))
    problem = LpProblem(c, A, senses, np.array(rhs), np.array(lower), np.array(upper),
                        maximize=maximize, var_names=names, row_names=row_names)
    return RmpModel(problem, x_index, y_index, z_index, f_offset, tuple_rows, demand_rows,
                    schedule_row)


def diagnose_infeasible(graph: ConflictGraph, mode: RmpMode) -> str:
    scenario = graph.scenario
    model_pool = [IndependentSet((), len(graph))]
    model = build_rmp(graph, model_pool, mode, validate=False) if len(graph) else None
    for k, j in zip(*np.nonzero(scenario.requests > 0)):
        if model is None or not any(kk == k and jj == j for _, kk, jj in model.y_index):
            return (f"coverage: no transmitter can serve file {j} to user "
                    f"{scenario.users[k].name} (no link, or file not cached)")
    if mode.objective is Objective.MAX_THROUGHPUT:
        return "schedule: demand cannot be met within one slot (sum f <= 1) with this pool"
    return "capacity: cache capacities cannot hold the required content"


def solve_rmp(graph: ConflictGraph, pool: Sequence[IndependentSet], mode: RmpMode = RmpMode(),
              validate: bool = True) -> RmpSolution:
    scenario = graph.scenario
    n_tx, n_users, n_files = len(scenario.transmitters), len(scenario.users), scenario.n_files
    model = build_rmp(graph, pool, mode, validate=validate)
    sol: LpSolution = solve_lp(model.problem)
    if sol.status is LpStatus.INFEASIBLE:
        raise InfeasibleError(diagnose_infeasible(graph, mode))
    if sol.status is LpStatus.UNBOUNDED:
        raise InfeasibleError("unbounded master problem (malformed scenario)")

    x = sol.x
    X = np.zeros((n_tx, n_files))
    if scenario.mbs is not None:
        X[scenario.mbs, :] = 1.0
    if mode.free_cache:
        for (n, j), v in model.x_index.items():
            X[n, j] = x[v]
    else:
        fixed = np.asarray(mode.fixed_cache, dtype=float)
        for n in scenario.sbs:
            X[n] = fixed[n]
    Y = np.zeros((n_tx, n_users, n_files))
    for (n, k, j), v in model.y_index.items():
        Y[n, k, j] = x[v]
    Z = np.zeros(len(graph))
    for t_idx, v in model.z_index.items():
        Z[t_idx] = x[v] * BIT_SCALE
    f = x[model.f_offset:].copy()

    sign = -1.0 if mode.objective is Objective.MAX_THROUGHPUT else 1.0
    duals = np.zeros(len(graph))
    for t_idx, r in model.tuple_rows.items():
        duals[t_idx] = max(sign * sol.duals[r], 0.0) / BIT_SCALE
    schedule_dual = None
    objective = sol.objective
    if model.schedule_row is not None:
        schedule_dual = max(float(sol.duals[model.schedule_row]), 0.0)
        objective *= BIT_SCALE
    return RmpSolution(objective=float(objective), schedule_length=float(f.sum()), X=X, Y=Y, Z=Z,
                       f=f, duals=duals, schedule_dual=schedule_dual,
                       lp_iterations=sol.iterations, model=model)


def write_lp_text(problem: LpProblem, out: TextIO) -> None:
    """CPLEX-LP style dump for cross-checking with an external solver."""
    names = problem.var_names or [f"x{i}" for i in range(problem.c.size)]
    rnames = problem.row_names or [f"r{i}" for i in range(problem.A.shape[0])]

    def expr(coefs: np.ndarray) -> str:
        terms = [f"{'+' if a >= 0 else '-'} {abs(a):.12g} {names[i]}"
                 for i, a in enumerate(coefs) if a != 0]
        return " ".join(terms) if terms else "0"

    out.write("Maximize\n" if problem.maximize else "Minimize\n")
    out.write(f" obj: {expr(problem.c)}\n")
    out.write("Subject To\n")
    for r, row in enumerate(problem.A):
        out.write(f" {rnames[r]}: {expr(row)} {problem.senses[r]} {problem.b[r]:.12g}\n")
    out.write("Bounds\n")
    for i, name in enumerate(names):
        lo, hi = problem.lower[i], problem.upper[i]
        hi_s = "+inf" if np.isinf(hi) else f"{hi:.12g}"
        out.write(f" {lo:.12g} <= {name} <= {hi_s}\n")
    out.write("End\n")
