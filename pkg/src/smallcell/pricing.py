"""Pricing: find the independent set of largest weight sum(lambda * capacity)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conflict import ConflictGraph, IndependentSet, can_add, lex_smaller
from .lp import LpProblem, LpStatus, SolverError, solve_lp


@dataclass(frozen=True)
class PricingResult:
    column: IndependentSet
    beta: float
    rounds: int = 0

    @property
    def omega(self) -> float:
        """Reduced cost of the column in the schedule-length master."""
        return 1.0 - self.beta


Pricer = Callable[[ConflictGraph, np.ndarray], PricingResult]


def tuple_weights(graph: ConflictGraph, duals: np.ndarray) -> np.ndarray:
    duals = np.asarray(duals, dtype=float)
    if duals.shape != (len(graph),):
        raise ValueError("one dual price per tuple expected")
    # round-off can leave tiny negative prices
    return np.maximum(duals, 0.0) * graph.capacities


def reduced_cost(duals: np.ndarray, column: IndependentSet, graph: ConflictGraph) -> float:
    w = tuple_weights(graph, duals)
    return 1.0 - float(sum(w[i] for i in column))


def solve_pricing_exact(graph: ConflictGraph, duals: np.ndarray) -> PricingResult:
    """Depth-first branch-and-bound over positive-weight tuples.

    Tuples are branched heaviest first; a node is pruned when its weight plus
    the weight of every still-compatible tuple cannot reach the incumbent.
    Co-optimal columns are broken towards the lexicographically smallest
    incidence vector.
    """
    w = tuple_weights(graph, duals)
    order = sorted((i for i in range(len(graph)) if w[i] > 0), key=lambda i: (-w[i], i))
    n = len(order)
    if n == 0:
        return PricingResult(IndependentSet((), len(graph)), 0.0)
    pos_of = {orig: p for p, orig in enumerate(order)}
    wp = [float(w[i]) for i in order]
    conflict = []
    for orig in order:
        mask = 0
        for j in np.flatnonzero(graph.adjacency[orig]):
            p = pos_of.get(int(j))
            if p is not None:
                mask |= 1 << p
        conflict.append(mask)
    tx_of = [graph.tuples[i].tx for i in order]
    rx_of = [graph.tuples[i].rx for i in order]
    tx_cap = [int(graph.tx_antennas[i]) for i in order]
    rx_cap = [int(graph.rx_antennas[i]) for i in order]

    best_val = 0.0
    best_set: tuple[int, ...] = ()
    chosen: list[int] = []
    tx_used: dict[int, int] = {}
    rx_used: dict[int, int] = {}

    def remaining(mask: int) -> float:
        total = 0.0
        while mask:
            low = mask & -mask
            total += wp[low.bit_length() - 1]
            mask ^= low
        return total

    def dfs(allowed: int, value: float) -> None:
        nonlocal best_val, best_set
        tol = 1e-12 * max(1.0, best_val)
        if allowed == 0:
            members = tuple(sorted(order[p] for p in chosen))
            if value > best_val + tol or (value >= best_val - tol and lex_smaller(members, best_set)):
                best_val, best_set = value, members
            return
        if value + remaining(allowed) < best_val - tol:
            return
        low = allowed & -allowed
        p = low.bit_length() - 1
        tx, rx = tx_of[p], rx_of[p]
        if tx_used.get(tx, 0) < tx_cap[p] and rx_used.get(rx, 0) < rx_cap[p]:
            chosen.append(p)
            tx_used[tx] = tx_used.get(tx, 0) + 1
            rx_used[rx] = rx_used.get(rx, 0) + 1
            dfs(allowed & ~low & ~conflict[p], value + wp[p])
            tx_used[tx] -= 1
            rx_used[rx] -= 1
            chosen.pop()
        dfs(allowed & ~low, value)

    dfs((1 << n) - 1, 0.0)
    # re-add in original index order for a reproducible floating-point sum
    beta = float(sum(w[i] for i in best_set))
    return PricingResult(IndependentSet(best_set, len(graph)), beta)


def _clique_rows(graph: ConflictGraph, cand: list[int]) -> list[tuple[frozenset[int], int]]:
    """Rows of the pricing relaxation as (tuple set, right-hand side).

    Same transmitter/channel and same receiver/channel groups, per-node antenna
    budgets, and one row per (tuple, interfering transmitter): the tuple plus
    every same-channel tuple of that transmitter aimed at another receiver.
    """
    scenario = graph.scenario
    groups: dict[tuple, set[int]] = {}
    budgets: dict[tuple, int] = {}
    for i in cand:
        t = graph.tuples[i]
        groups.setdefault(("tx_ch", t.tx, t.channel), set()).add(i)
        groups.setdefault(("rx_ch", t.rx, t.channel), set()).add(i)
        groups.setdefault(("tx", t.tx), set()).add(i)
        groups.setdefault(("rx", t.rx), set()).add(i)
        budgets[("tx", t.tx)] = int(graph.tx_antennas[i])
        budgets[("rx", t.rx)] = int(graph.rx_antennas[i])
    by_tx_ch: dict[tuple[int, int], list[int]] = {}
    for i in cand:
        t = graph.tuples[i]
        by_tx_ch.setdefault((t.tx, t.channel), []).append(i)
    for i in cand:
        t = graph.tuples[i]
        for (tx, ch), members in by_tx_ch.items():
            if ch != t.channel or tx == t.tx:
                continue
            if scenario.distance(tx, t.rx) <= scenario.interference_range(tx, ch):
                others = {j for j in members if graph.tuples[j].rx != t.rx}
                if others:
                    groups[("ir", i, tx)] = {i} | others
    rows = {}
    for key, members in groups.items():
        rhs = budgets.get(key, 1)
        if len(members) > rhs:
            rows[frozenset(members)] = min(rhs, rows.get(frozenset(members), rhs))
    return sorted(rows.items(), key=lambda kv: (sorted(kv[0]), kv[1]))


def solve_pricing_sequential_fixing(graph: ConflictGraph, duals: np.ndarray) -> PricingResult:
    """LP-relaxation heuristic that fixes one variable per round.

    Each round solves the relaxation over the unfixed tuples and fixes the
    largest fractional one to 1 when that keeps the column independent,
    otherwise to 0.  An integral relaxation ends the loop early.
    """
    w = tuple_weights(graph, duals)
    cand = [i for i in range(len(graph)) if w[i] > 0]
    ones: list[int] = []
    free = list(cand)
    rows = _clique_rows(graph, cand)
    rounds = 0
    while free:
        rounds += 1
        values = _relaxation(free, ones, rows, w)
        picks = [i for i, v in zip(free, values) if v > 1.0 - 1e-9]
        if all(v < 1e-9 or v > 1.0 - 1e-9 for v in values) and _jointly_addable(ones, picks, graph):
            ones.extend(picks)
            break
        top = max(range(len(free)), key=lambda p: (values[p], -free[p]))
        v = free.pop(top)
        if can_add(ones, v, graph):
            ones.append(v)
            free = [j for j in free if can_add(ones, j, graph)]
    column = IndependentSet.of(ones, len(graph))
    return PricingResult(column, float(sum(w[i] for i in column)), rounds)


def _jointly_addable(ones: list[int], picks: list[int], graph: ConflictGraph) -> bool:
    current = list(ones)
    for p in picks:
        if not can_add(current, p, graph):
            return False
        current.append(p)
    return True


def _relaxation(free: list[int], ones: list[int], rows, w: np.ndarray) -> list[float]:
    index = {i: p for p, i in enumerate(free)}
    fixed = set(ones)
    A, b = [], []
    for members, rhs in rows:
        live = [index[i] for i in members if i in index]
        if not live:
            continue
        cap = rhs - sum(1 for i in members if i in fixed)
        if len(live) <= cap:
            continue
        row = np.zeros(len(free))
        row[live] = 1.0
        A.append(row)
        b.append(max(cap, 0))
    problem = LpProblem(w[free], np.array(A).reshape(len(A), len(free)), ["<="] * len(A),
                        np.array(b, dtype=float), upper=np.ones(len(free)), maximize=True)
    sol = solve_lp(problem)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverError(f"pricing relaxation returned {sol.status.value}")
    return [min(max(v, 0.0), 1.0) for v in sol.x]


PRICERS: dict[str, Pricer] = {
    "exact": solve_pricing_exact,
    "sequential_fixing": solve_pricing_sequential_fixing,
}


def get_pricer(name: str) -> Pricer:
    try:
        return PRICERS[name]
    except KeyError:
        raise ValueError(f"unknown pricer {name!r}; choose from {sorted(PRICERS)}") from None
