"""Femtocaching-style comparison: popularity-greedy whole-file caching with a
schedule that never reuses a channel across the macro-cell."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colgen import initial_pool
from .conflict import ConflictGraph
from .master import Objective, RmpMode, RmpSolution, solve_rmp


@dataclass
class BaselineResult:
    X: np.ndarray
    routes: dict[tuple[int, int], int]
    delta: float
    served_bits: np.ndarray
    rmp: RmpSolution


def _coverage(graph: ConflictGraph) -> dict[int, set[int]]:
    """Users reachable from each transmitter over at least one tuple."""
    out: dict[int, set[int]] = {}
    for t in graph.tuples:
        out.setdefault(t.tx, set()).add(t.rx)
    return out


def femtocache_assign(graph: ConflictGraph) -> np.ndarray:
    """Greedy 0/1 placement per SBS by local request volume per cached bit.

    Files are taken in descending order of sum(alpha_kj * S_j) / S_j over the
    SBS's covered users (ties by file id); a file that does not fit is skipped
    and the next one is tried.
    """
    scenario = graph.scenario
    alpha = scenario.requests
    sizes = np.asarray(scenario.catalog.sizes_bits)
    cover = _coverage(graph)
    X = np.zeros((len(scenario.transmitters), scenario.n_files))
    if scenario.mbs is not None:
        X[scenario.mbs] = 1.0
    for n in scenario.sbs:
        users = sorted(cover.get(n, ()))
        score = alpha[users].sum(axis=0) if users else np.zeros(scenario.n_files)
        free = scenario.transmitters[n].cache_bits
        for j in sorted(range(scenario.n_files), key=lambda j: (-score[j], j)):
            if sizes[j] <= free:
                X[n, j] = 1.0
                free -= sizes[j]
    return X


def baseline_routes(graph: ConflictGraph, X: np.ndarray) -> dict[tuple[int, int], int]:
    """Nearest covering SBS holding the file, else the MBS."""
    scenario = graph.scenario
    cover = _coverage(graph)
    routes = {}
    for k, j in zip(*np.nonzero(scenario.requests > 0)):
        k, j = int(k), int(j)
        holders = [n for n in scenario.sbs if X[n, j] >= 1.0 and k in cover.get(n, ())]
        if holders:
            routes[(k, j)] = min(holders, key=lambda n: (scenario.distance(n, k), n))
        elif scenario.mbs is not None:
            routes[(k, j)] = scenario.mbs
        else:
            routes[(k, j)] = -1
    return routes


def baseline_schedule(graph: ConflictGraph, X: np.ndarray | None = None) -> BaselineResult:
    """Schedule length with one active link per column (no spatial reuse)."""
    if X is None:
        X = femtocache_assign(graph)
    routes = baseline_routes(graph, X)
    rmp = solve_rmp(graph, initial_pool(graph), RmpMode(fixed_cache=X, routes=routes), validate=False)
    scenario = graph.scenario
    served = np.zeros(len(scenario.users))
    sizes = np.asarray(scenario.catalog.sizes_bits)
    for (k, j), n in routes.items():
        served[k] += scenario.requests[k, j] * sizes[j] * rmp.Y[n, k, j]
    return BaselineResult(X, routes, rmp.objective, served, rmp)


def baseline_throughput(graph: ConflictGraph, X: np.ndarray | None = None) -> float:
    """Total bits per slot of the no-reuse system under the throughput objective."""
    if X is None:
        X = femtocache_assign(graph)
    mode = RmpMode(Objective.MAX_THROUGHPUT, fixed_cache=X, routes=baseline_routes(graph, X))
    return solve_rmp(graph, initial_pool(graph), mode, validate=False).objective
