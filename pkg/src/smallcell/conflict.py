"""Conflict graph over communication tuples and the independence predicate."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .model import CommTuple, Scenario, enumerate_tuples

ENUMERATION_GUARD = 20


class EnumerationGuardError(ValueError):
    """Refusal to enumerate independent sets on a graph that is too large."""


@dataclass(frozen=True, order=True)
class IndependentSet:
    """A column: the tuple indices that are simultaneously active."""
    members: tuple[int, ...]
    size: int

    @classmethod
    def of(cls, members: Iterable[int], size: int) -> "IndependentSet":
        m = tuple(sorted(set(int(i) for i in members)))
        if m and (m[0] < 0 or m[-1] >= size):
            raise ValueError("member index out of range")
        return cls(m, size)

    @classmethod
    def from_incidence(cls, incidence: Sequence[int]) -> "IndependentSet":
        vec = np.asarray(incidence)
        return cls(tuple(int(i) for i in np.flatnonzero(vec)), vec.size)

    @property
    def incidence(self) -> np.ndarray:
        vec = np.zeros(self.size, dtype=np.int8)
        vec[list(self.members)] = 1
        return vec

    def __contains__(self, index: object) -> bool:
        return index in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)


def lex_smaller(a: Iterable[int], b: Iterable[int]) -> bool:
    """True when the incidence vector of ``a`` is lexicographically below ``b``'s."""
    diff = set(a) ^ set(b)
    return bool(diff) and min(diff) in set(b)


def conflicts(t1: CommTuple, t2: CommTuple, scenario: Scenario) -> bool:
    """Protocol-model conflict between two distinct tuples.

    Same channel and either a shared endpoint or one receiver inside the
    other transmitter's interference range (closed ball).  A node with a
    single antenna also cannot take part in two tuples on different channels.
    """
    if t1.channel != t2.channel:
        return ((t1.tx == t2.tx and scenario.transmitters[t1.tx].antennas == 1)
                or (t1.rx == t2.rx and scenario.users[t1.rx].antennas == 1))
    if t1.tx == t2.tx or t1.rx == t2.rx:
        return True
    c = t1.channel
    return (scenario.distance(t2.tx, t1.rx) <= scenario.interference_range(t2.tx, c)
            or scenario.distance(t1.tx, t2.rx) <= scenario.interference_range(t1.tx, c))


class ConflictGraph:
    """Tuples of a scenario plus their pairwise conflicts.

    Vertices follow :func:`enumerate_tuples` order (transmitter, receiver,
    channel).  Single-antenna budgets are pairwise and appear as edges, so
    the graph is exact when every node has one antenna; larger budgets are
    enforced by :func:`is_independent`.
    """

    def __init__(self, scenario: Scenario, tuples: Sequence[CommTuple] | None = None):
        self.scenario = scenario
        self.tuples = list(enumerate_tuples(scenario) if tuples is None else tuples)
        n = len(self.tuples)
        adj = np.zeros((n, n), dtype=bool)
        irange = {}
        single_tx = [node.antennas == 1 for node in scenario.transmitters]
        single_rx = [node.antennas == 1 for node in scenario.users]
        for t in self.tuples:
            key = (t.tx, t.channel)
            if key not in irange:
                irange[key] = scenario.interference_range(t.tx, t.channel)
        for a in range(n):
            ta = self.tuples[a]
            for b in range(a + 1, n):
                tb = self.tuples[b]
                if ta.channel != tb.channel:
                    if ((ta.tx == tb.tx and single_tx[ta.tx])
                            or (ta.rx == tb.rx and single_rx[ta.rx])):
                        adj[a, b] = adj[b, a] = True
                    continue
                if (ta.tx == tb.tx or ta.rx == tb.rx
                        or scenario.distance(tb.tx, ta.rx) <= irange[(tb.tx, tb.channel)]
                        or scenario.distance(ta.tx, tb.rx) <= irange[(ta.tx, ta.channel)]):
                    adj[a, b] = adj[b, a] = True
        self.adjacency = adj
        self.tx_antennas = np.array([scenario.transmitters[t.tx].antennas for t in self.tuples], dtype=int)
        self.rx_antennas = np.array([scenario.users[t.rx].antennas for t in self.tuples], dtype=int)

    def __len__(self) -> int:
        return len(self.tuples)

    @cached_property
    def masks(self) -> list[int]:
        """Neighbourhood of each vertex as an int bitmask."""
        out = []
        for row in self.adjacency:
            mask = 0
            for j in np.flatnonzero(row):
                mask |= 1 << int(j)
            out.append(mask)
        return out

    @cached_property
    def capacities(self) -> np.ndarray:
        """Bits each tuple carries in one full slot."""
        return np.array([t.capacity for t in self.tuples], dtype=float) * self.scenario.slot_s

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def write_edge_list(self, out: TextIO) -> None:
        """Debug dump: a vertex table followed by one ``u v`` line per edge."""
        names = self.scenario
        out.write(f"# vertices {len(self)}\n")
        for i, t in enumerate(self.tuples):
            out.write(f"v {i} {names.transmitters[t.tx].name} {names.users[t.rx].name} "
                      f"ch={t.channel} cap_bps={t.capacity:.6g}\n")
        out.write(f"# edges {len(self.edges)}\n")
        for a, b in self.edges:
            out.write(f"e {a} {b}\n")


def build_conflict_graph(scenario: Scenario) -> ConflictGraph:
    return ConflictGraph(scenario)


def _members(candidate, n: int) -> list[int]:
    if isinstance(candidate, IndependentSet):
        if candidate.size != n:
            raise ValueError(f"incidence length {candidate.size} != tuple count {n}")
        return list(candidate.members)
    vec = np.asarray(candidate)
    if vec.ndim != 1 or vec.size != n:
        raise ValueError(f"incidence length {vec.size} != tuple count {n}")
    return np.flatnonzero(vec).tolist()


def _feasible(members: Sequence[int], graph: ConflictGraph) -> bool:
    if len(members) > 1 and graph.adjacency[np.ix_(members, members)].any():
        return False
    tx_used: dict[int, int] = {}
    rx_used: dict[int, int] = {}
    for i in members:
        t = graph.tuples[i]
        tx_used[t.tx] = tx_used.get(t.tx, 0) + 1
        rx_used[t.rx] = rx_used.get(t.rx, 0) + 1
        if tx_used[t.tx] > graph.tx_antennas[i] or rx_used[t.rx] > graph.rx_antennas[i]:
            return False
    return True


def is_independent(candidate, graph: ConflictGraph) -> bool:
    """Pairwise conflict-freeness plus per-node antenna budgets."""
    return _feasible(_members(candidate, len(graph)), graph)


def can_add(members: Sequence[int], index: int, graph: ConflictGraph) -> bool:
    if index in members:
        return False
    return _feasible(list(members) + [index], graph)


def is_maximal(candidate, graph: ConflictGraph) -> bool:
    members = _members(candidate, len(graph))
    if not _feasible(members, graph):
        raise ValueError("candidate is not independent")
    chosen = set(members)
    return not any(can_add(members, i, graph) for i in range(len(graph)) if i not in chosen)


def enumerate_independent_sets(graph: ConflictGraph, max_tuples_guard: int = ENUMERATION_GUARD,
                               maximal_only: bool = True) -> list[IndependentSet]:
    """Exhaustive enumeration for tiny graphs (oracle support).

    Returns every maximal independent set, or every independent set
    (including the empty one) when ``maximal_only`` is false.
    """
    n = len(graph)
    if n > max_tuples_guard:
        raise EnumerationGuardError(f"{n} tuples exceed the enumeration guard {max_tuples_guard}")
    out: list[IndependentSet] = []
    chosen: list[int] = []

    def extend(i: int) -> None:
        if i == n:
            if not maximal_only or not any(can_add(chosen, j, graph) for j in range(n)):
                out.append(IndependentSet(tuple(chosen), n))
            return
        if can_add(chosen, i, graph):
            chosen.append(i)
            extend(i + 1)
            chosen.pop()
        extend(i + 1)

    extend(0)
    return out
