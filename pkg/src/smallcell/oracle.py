"""Ground truth for tiny instances: the master over every maximal independent set."""

from __future__ import annotations

from .conflict import ENUMERATION_GUARD, ConflictGraph, IndependentSet, enumerate_independent_sets
from .master import RmpMode, RmpSolution, solve_rmp


def solve_full_lp(graph: ConflictGraph, mode: RmpMode = RmpMode(),
                  max_tuples_guard: int = ENUMERATION_GUARD,
                  maximal_only: bool = True) -> tuple[float, RmpSolution, list[IndependentSet]]:
    """Optimal schedule length with the complete column set.

    Maximal sets suffice: time spent on a non-maximal set can be moved to a
    superset without losing capacity.  ``maximal_only=False`` keeps every
    nonempty independent set, for checking that claim.
    """
    pool = enumerate_independent_sets(graph, max_tuples_guard, maximal_only=maximal_only)
    pool = [col for col in pool if len(col)] or [IndependentSet((), len(graph))]
    sol = solve_rmp(graph, pool, mode, validate=False)
    return sol.objective, sol, pool
