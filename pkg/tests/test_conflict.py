import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smallcell.conflict import (ConflictGraph, EnumerationGuardError, IndependentSet, conflicts,
                                enumerate_independent_sets, is_independent, is_maximal,
                                lex_smaller)
from smallcell.model import CommTuple, ScenarioConfig, generate_scenario

from conftest import sbs, two_link_scenario, user

TINY = ScenarioConfig(radius_m=150.0, n_sbs=3, n_users=4, n_files=4, n_secondary_channels=2,
                      channels_per_sbs=1, channels_per_user=1, tx_range_m=80.0)


def small_graphs(max_vertices=12, count=30, antennas=1):
    out, seed = [], 0
    while len(out) < count:
        cfg = ScenarioConfig(radius_m=150.0, n_sbs=3, n_users=4, n_files=3,
                             n_secondary_channels=2, channels_per_sbs=1 + seed % 2,
                             channels_per_user=1 + seed % 2, tx_range_m=90.0,
                             antennas_mbs=antennas, antennas_sbs=antennas, antennas_user=antennas)
        g = ConflictGraph(generate_scenario(cfg, seed))
        if 0 < len(g) <= max_vertices:
            out.append(g)
        seed += 1
    return out


def test_fig3_edge_v1_v4(fig3):
    g = ConflictGraph(fig3)
    assert g.adjacency[0, 3]
    assert conflicts(g.tuples[0], g.tuples[3], fig3)


def test_fig3_published_sets(fig3):
    g = ConflictGraph(fig3)
    i1, i2 = [1, 0, 0, 0, 1], [1, 0, 1, 0, 1]
    assert is_independent(i1, g) and is_independent(i2, g)
    assert is_maximal(i2, g) and not is_maximal(i1, g)
    assert IndependentSet.from_incidence(i2) in enumerate_independent_sets(g)


def test_same_transmitter_same_channel_conflicts(fig3):
    g = ConflictGraph(fig3)
    assert conflicts(g.tuples[0], g.tuples[1], fig3)


def test_single_antenna_user_cannot_take_two_channels(fig3):
    g = ConflictGraph(fig3)
    assert conflicts(g.tuples[1], g.tuples[2], fig3) and g.adjacency[1, 2]


def test_different_channels_disjoint_nodes_do_not_conflict(fig3):
    a = CommTuple(0, 0, 2, 1.0, 60.0)
    b = CommTuple(1, 2, 1, 1.0, 90.0)
    assert not conflicts(a, b, fig3)


def test_interference_boundary_is_closed():
    from smallcell.model import manual_scenario
    tx = [sbs("A", 0.0, 0.0, {1}), sbs("B", 290.0, 0.0, {1})]

    def build(xb):
        users = [user("a", 50.0, 0.0, {1}), user("b", xb, 0.0, {1})]
        return manual_scenario(tx, users, [1e6, 4e5], np.ones((2, 1)), [1.0])

    ir = build(200.0).interference_range(0, 1)
    for xb, edge in ((ir, True), (np.nextafter(ir, np.inf), False)):
        g = ConflictGraph(build(xb))
        ab = [i for i, t in enumerate(g.tuples) if (t.tx, t.rx) in {(0, 0), (1, 1)}]
        assert len(ab) == 2 and g.adjacency[ab[0], ab[1]] == edge


def test_empty_graph():
    tx = [sbs("A", 0.0, 0.0, {1})]
    users = [user("far", 900.0, 0.0, {1})]
    from smallcell.model import manual_scenario
    g = ConflictGraph(manual_scenario(tx, users, [1e6, 4e5], [[1.0]], [1.0]))
    assert len(g) == 0 and g.edges == []
    assert is_independent([], g)


def test_adjacency_matches_pairwise_oracle():
    for g in small_graphs(count=10, max_vertices=20):
        brute = sum(conflicts(a, b, g.scenario) for a, b in itertools.combinations(g.tuples, 2))
        assert len(g.edges) == brute
        assert (g.adjacency == g.adjacency.T).all() and not g.adjacency.diagonal().any()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=5000))
def test_conflicts_symmetric(seed):
    scenario = generate_scenario(TINY, seed)
    g = ConflictGraph(scenario)
    for a, b in itertools.combinations(g.tuples, 2):
        assert conflicts(a, b, scenario) == conflicts(b, a, scenario)


def test_independence_equals_edge_absence_exhaustively():
    for g in small_graphs():
        n = len(g)
        for mask in range(1 << n):
            members = [i for i in range(n) if mask >> i & 1]
            no_edge = not any(g.adjacency[a, b] for a, b in itertools.combinations(members, 2))
            assert is_independent(IndependentSet(tuple(members), n), g) == no_edge


def test_known_edges_break_independence():
    for g in small_graphs(count=5):
        for a, b in g.edges:
            vec = np.zeros(len(g), dtype=int)
            vec[[a, b]] = 1
            assert not is_independent(vec, g)


def test_length_mismatch_rejected(fig3):
    g = ConflictGraph(fig3)
    with pytest.raises(ValueError):
        is_independent([1, 0], g)


def test_non_independent_maximality_rejected(fig3):
    g = ConflictGraph(fig3)
    with pytest.raises(ValueError):
        is_maximal([1, 1, 0, 0, 0], g)


def test_empty_set_not_maximal(fig3):
    assert not is_maximal([0] * 5, ConflictGraph(fig3))


def test_no_edges_single_maximal_set():
    g = ConflictGraph(two_link_scenario(far=True))
    assert g.edges == []
    assert enumerate_independent_sets(g) == [IndependentSet(tuple(range(len(g))), len(g))]


def test_enumeration_outputs_are_maximal_and_downward_closed():
    for g in small_graphs():
        sets = enumerate_independent_sets(g)
        assert len(set(sets)) == len(sets)
        for s in sets:
            assert is_maximal(s, g)
            for r in range(len(s) + 1):
                for sub in itertools.combinations(s.members, r):
                    assert is_independent(IndependentSet(sub, len(g)), g)


def test_full_enumeration_matches_brute_force():
    for g in small_graphs(count=10, antennas=2):
        n = len(g)
        brute = {tuple(i for i in range(n) if m >> i & 1) for m in range(1 << n)
                 if is_independent(IndependentSet(tuple(i for i in range(n) if m >> i & 1), n), g)}
        assert {s.members for s in enumerate_independent_sets(g, maximal_only=False)} == brute


def test_antenna_budget_beyond_pairwise(fig3):
    g = ConflictGraph(fig3)
    # v1 and v3 share SBS1 on different channels: fine with two antennas, not with one
    assert not g.adjacency[0, 2] and is_independent([1, 0, 1, 0, 0], g)
    g.tx_antennas = np.ones(len(g), dtype=int)
    assert not is_independent([1, 0, 1, 0, 0], g)


def test_enumeration_guard():
    cfg = ScenarioConfig(radius_m=200.0, n_sbs=4, n_users=8, n_files=3, n_secondary_channels=2,
                         channels_per_sbs=2, channels_per_user=2)
    g = ConflictGraph(generate_scenario(cfg, 0))
    assert len(g) > 20
    with pytest.raises(EnumerationGuardError):
        enumerate_independent_sets(g)


def test_lex_order():
    assert lex_smaller([2], [1])
    assert not lex_smaller([1], [2])
    assert not lex_smaller([1, 3], [1, 3])


def test_edge_list_dump(fig3):
    out = io.StringIO()
    ConflictGraph(fig3).write_edge_list(out)
    text = out.getvalue()
    assert "# vertices 5" in text and "e 0 3" in text
