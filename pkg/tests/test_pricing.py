import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smallcell.conflict import ConflictGraph, IndependentSet, is_independent
from smallcell.model import ScenarioConfig, generate_scenario
from smallcell.pricing import (get_pricer, reduced_cost, solve_pricing_exact,
                               solve_pricing_sequential_fixing)

from conftest import two_link_scenario


def graphs_up_to(max_tuples=15, count=50, antennas=1):
    out, seed = [], 100
    while len(out) < count:
        cfg = ScenarioConfig(radius_m=160.0, n_sbs=3, n_users=4, n_files=3,
                             n_secondary_channels=2, channels_per_sbs=1 + seed % 2,
                             channels_per_user=1 + seed % 2, tx_range_m=90.0,
                             antennas_mbs=antennas, antennas_sbs=antennas, antennas_user=antennas)
        g = ConflictGraph(generate_scenario(cfg, seed))
        if 2 <= len(g) <= max_tuples:
            out.append(g)
        seed += 1
    return out


def brute_force_beta(graph, duals):
    """Largest sum of lambda * capacity over every independent subset."""
    w = np.maximum(duals, 0.0) * graph.capacities
    n = len(graph)
    best = 0.0
    for r in range(1, n + 1):
        for members in itertools.combinations(range(n), r):
            if is_independent(IndependentSet(members, n), graph):
                best = max(best, float(sum(w[i] for i in members)))
    return best


def random_duals(graph, rng):
    lam = rng.exponential(1.0, len(graph)) / graph.capacities
    lam[rng.random(len(graph)) < 0.3] = 0.0
    return lam


def test_zero_duals():
    g = graphs_up_to(count=1)[0]
    for pricer in (solve_pricing_exact, solve_pricing_sequential_fixing):
        res = pricer(g, np.zeros(len(g)))
        assert res.beta == 0.0 and len(res.column) == 0 and res.omega == 1.0


def test_single_positive_weight():
    g = graphs_up_to(count=1)[0]
    duals = np.zeros(len(g))
    duals[1] = 5.0 / g.capacities[1]
    res = solve_pricing_exact(g, duals)
    assert res.column.members == (1,) and res.beta == pytest.approx(5.0)


def test_reduced_cost_matches_dot_product():
    rng = np.random.default_rng(5)
    g = graphs_up_to(count=1)[0]
    lam = random_duals(g, rng)
    col = solve_pricing_exact(g, lam).column
    expected = 1.0 - sum(lam[i] * g.tuples[i].capacity * g.scenario.slot_s for i in col)
    assert reduced_cost(lam, col, g) == pytest.approx(expected, rel=1e-12)
    assert reduced_cost(np.zeros(len(g)), col, g) == 1.0


def test_unit_singleton_has_zero_reduced_cost():
    g = graphs_up_to(count=1)[0]
    lam = np.zeros(len(g))
    lam[0] = 1.0 / g.capacities[0]
    assert reduced_cost(lam, IndependentSet((0,), len(g)), g) == pytest.approx(0.0, abs=1e-15)


def test_exact_matches_exhaustive_on_fifty_instances():
    rng = np.random.default_rng(11)
    for g in graphs_up_to():
        lam = random_duals(g, rng)
        res = solve_pricing_exact(g, lam)
        assert is_independent(res.column, g)
        assert res.beta == pytest.approx(brute_force_beta(g, lam), rel=1e-12, abs=0)
        assert res.omega == 1.0 - res.beta


def test_exact_with_antenna_budgets():
    rng = np.random.default_rng(12)
    for g in graphs_up_to(count=15, antennas=2):
        lam = random_duals(g, rng)
        res = solve_pricing_exact(g, lam)
        assert is_independent(res.column, g)
        assert res.beta == pytest.approx(brute_force_beta(g, lam), rel=1e-12, abs=0)


def test_exact_tie_break_is_lexicographic():
    g = ConflictGraph(two_link_scenario(far=False))
    assert g.adjacency[0, 1]
    lam = 1.0 / g.capacities  # equal weights on two conflicting tuples
    # incidence (0, 1) precedes (1, 0)
    assert solve_pricing_exact(g, lam).column.members == (1,)


def test_sequential_fixing_feasible_and_dominated():
    rng = np.random.default_rng(13)
    ratios = []
    for g in graphs_up_to():
        lam = random_duals(g, rng)
        sf = solve_pricing_sequential_fixing(g, lam)
        exact = solve_pricing_exact(g, lam)
        assert is_independent(sf.column, g)
        assert sf.beta <= exact.beta * (1 + 1e-12)
        assert sf.rounds <= len(g)
        if exact.beta > 0:
            ratios.append(sf.beta / exact.beta)
    assert np.mean(ratios) > 0.8


def test_sequential_fixing_zero_conflict_takes_everything():
    g = ConflictGraph(two_link_scenario(far=True))
    lam = np.full(len(g), 1e-6)
    sf = solve_pricing_sequential_fixing(g, lam)
    assert sf.column.members == tuple(range(len(g)))
    assert sf.beta == pytest.approx(solve_pricing_exact(g, lam).beta)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_omega_sign_tracks_beta(seed):
    rng = np.random.default_rng(seed)
    g = graphs_up_to(count=1)[0]
    res = solve_pricing_exact(g, random_duals(g, rng) * rng.uniform(0.1, 3.0))
    assert (res.omega < 0) == (res.beta > 1)


def test_dual_length_checked():
    g = graphs_up_to(count=1)[0]
    with pytest.raises(ValueError):
        solve_pricing_exact(g, np.zeros(len(g) + 1))


def test_pricer_lookup():
    assert get_pricer("exact") is solve_pricing_exact
    with pytest.raises(ValueError):
        get_pricer("greedy")
