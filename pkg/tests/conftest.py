import numpy as np
import pytest

from smallcell.model import Node, NodeKind, manual_scenario, power_for_range

THRESHOLD = 1e-10
GAMMA = 3.0


def sbs(name, x, y, channels, antennas=1, cache_bits=0.0, tr=100.0):
    return Node(name, NodeKind.SBS, x, y, frozenset(channels), antennas=antennas,
                cache_bits=cache_bits, tx_power_w=power_for_range(tr, THRESHOLD, 1.0, GAMMA))


def user(name, x, y, channels, antennas=1):
    return Node(name, NodeKind.USER, x, y, frozenset(channels), antennas=antennas)


def fig3_scenario():
    """Two SBSs, three users; SBS1 and user 2 share channels {1, 2}, every other pair only 1.

    SBS1 has two antennas so it can serve users 1 and 2 on different channels
    at once, as the published maximal set requires.
    """
    transmitters = [sbs("SBS1", 0.0, 0.0, {1, 2}, antennas=2, cache_bits=1e9),
                    sbs("SBS2", 190.0, 0.0, {1}, cache_bits=1e9)]
    users = [user("U1", -60.0, 0.0, {1}), user("U2", 95.0, 0.0, {1, 2}),
             user("U3", 280.0, 0.0, {1})]
    return manual_scenario(transmitters, users, [1e6, 4e5, 4e5], np.ones((3, 1)), [8e6])


def two_link_scenario(demand_bits=8e6, far=True):
    """Two SBS-user pairs on channel 1, far enough apart to reuse it when ``far``."""
    gap = 1000.0 if far else 150.0
    transmitters = [sbs("A", 0.0, 0.0, {1}, cache_bits=1e9), sbs("B", gap, 0.0, {1}, cache_bits=1e9)]
    users = [user("a", 50.0, 0.0, {1}), user("b", gap + 50.0, 0.0, {1})]
    requests = np.array([[1.0, 0.0], [0.0, 1.0]])
    return manual_scenario(transmitters, users, [1e6, 4e5], requests, [demand_bits, demand_bits],
                           radius_m=2000.0)


def single_link_scenario(demand_fraction=0.5):
    """One SBS holding the only file, one user; demand is a fraction of one slot's capacity."""
    from smallcell.model import enumerate_tuples
    transmitters = [sbs("A", 0.0, 0.0, {1}, cache_bits=1e12)]
    users = [user("a", 50.0, 0.0, {1})]
    probe = manual_scenario(transmitters, users, [1e6, 4e5], [[1.0]], [1.0])
    cap = enumerate_tuples(probe)[0].capacity
    return manual_scenario(transmitters, users, [1e6, 4e5], [[1.0]], [demand_fraction * cap])


@pytest.fixture
def fig3():
    return fig3_scenario()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
