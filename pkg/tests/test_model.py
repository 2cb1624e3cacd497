import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smallcell.model import (ScenarioConfig, ScenarioError, Scenario, enumerate_tuples,
                             generate_scenario, interference_range, link_capacity,
                             power_for_range, transmission_range, zipf_distribution,
                             zipf_popularity)

positive = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_transmission_range_identity_base():
    for gamma in (2.0, 3.0, 4.5):
        assert transmission_range(2.0, 4.0, 2.0, gamma) == pytest.approx(1.0)


def test_transmission_range_fourth_root():
    assert transmission_range(1e4, 1.0, 1.0, 4.0) == pytest.approx(10.0)


def test_transmission_range_rejects_nonpositive():
    with pytest.raises(ValueError):
        transmission_range(0.0, 1.0, 1.0, 3.0)
    with pytest.raises(ValueError):
        transmission_range(1.0, -1.0, 1.0, 3.0)


@settings(max_examples=100)
@given(power=positive, threshold=positive, gain=positive,
       gamma=st.floats(min_value=1.5, max_value=6.0))
def test_power_range_round_trip(power, threshold, gain, gamma):
    tr = transmission_range(power, threshold, gain, gamma)
    assert power_for_range(tr, threshold, gain, gamma) == pytest.approx(power, rel=1e-9)


def test_interference_range_equal_thresholds():
    assert interference_range(5.0, 1e-3, 1.0, 3.0) == transmission_range(5.0, 1e-3, 1.0, 3.0)


def test_interference_range_twice_transmission():
    gamma = 3.0
    tr = transmission_range(5.0, 1e-3, 1.0, gamma)
    assert interference_range(5.0, 1e-3 / 2 ** gamma, 1.0, gamma) == pytest.approx(2 * tr)


@given(power=positive, p_t=positive, frac=st.floats(min_value=1e-3, max_value=1.0))
def test_interference_range_dominates(power, p_t, frac):
    assert interference_range(power, p_t * frac, 1.0, 3.0) >= transmission_range(power, p_t, 1.0, 3.0) * (1 - 1e-12)


def test_capacity_unit_snr():
    # SNR = g d^-gamma P / eta = 1 when P = eta d^gamma
    assert link_capacity(4e5, 10.0, 1e-13 * 1e3, 1.0, 3.0, 1e-13) == pytest.approx(4e5)


def test_capacity_zero_power():
    assert link_capacity(4e5, 10.0, 0.0, 1.0, 3.0, 1e-13) == 0.0


def test_capacity_snr_fifteen():
    assert link_capacity(400e3, 10.0, 15 * 1e-13 * 1e3, 1.0, 3.0, 1e-13) == pytest.approx(1.6e6)


def test_capacity_rejects_zero_distance():
    with pytest.raises(ValueError):
        link_capacity(4e5, 0.0, 1.0, 1.0, 3.0, 1e-13)


def test_zipf_single_file():
    assert zipf_popularity(1, 0.8, 1) == 1.0


def test_zipf_uniform():
    assert [zipf_popularity(m, 0.0, 4) for m in range(1, 5)] == pytest.approx([0.25] * 4)


def test_zipf_table_value_against_direct_sum():
    denom = math.fsum(1.0 / j ** 0.8 for j in range(1, 201))
    assert zipf_popularity(1, 0.8, 200) == pytest.approx(1.0 / denom, rel=1e-12)


def test_zipf_rejects_bad_rank():
    with pytest.raises(ValueError):
        zipf_popularity(0, 0.8, 5)
    with pytest.raises(ValueError):
        zipf_popularity(6, 0.8, 5)


@given(zeta=st.floats(min_value=0.0, max_value=3.0), n=st.integers(min_value=1, max_value=300))
def test_zipf_normalised_and_nonincreasing(zeta, n):
    p = zipf_distribution(zeta, n)
    assert abs(p.sum() - 1.0) <= 1e-9
    assert np.all(np.diff(p) <= 1e-15)


def test_table1_defaults():
    cfg = ScenarioConfig()
    assert (cfg.n_sbs, cfg.n_users, cfg.n_files) == (14, 200, 200)
    assert cfg.cache_bytes == 4e9 and cfg.zipf_zeta == 0.8 and cfg.epsilon == 0.03
    assert (cfg.n_secondary_channels, cfg.channels_per_sbs, cfg.channels_per_user) == (10, 5, 5)


def test_table1_scenario_shape():
    scenario = generate_scenario(ScenarioConfig(), 3)
    assert len(scenario.users) == 200 and len(scenario.sbs) == 14
    assert len(scenario.channels) == 11
    for n in scenario.sbs:
        assert len(scenario.transmitters[n].channels) == 5
    for u in scenario.users:
        assert len(u.channels) == 5
        assert math.hypot(u.x, u.y) <= 400.0
    mbs = scenario.transmitters[scenario.mbs]
    assert (mbs.x, mbs.y) == (0.0, 0.0)


def test_generation_is_deterministic():
    cfg = ScenarioConfig(n_sbs=4, n_users=10, n_files=10)
    assert generate_scenario(cfg, 7).to_json() == generate_scenario(cfg, 7).to_json()
    assert generate_scenario(cfg, 7).to_json() != generate_scenario(cfg, 8).to_json()


def test_generation_nests_when_users_grow():
    small = generate_scenario(ScenarioConfig(n_sbs=3, n_users=5, n_files=10), 1)
    big = generate_scenario(ScenarioConfig(n_sbs=3, n_users=9, n_files=10), 1)
    assert big.users[:5] == small.users


def test_scenario_json_round_trip():
    scenario = generate_scenario(ScenarioConfig(n_sbs=3, n_users=6, n_files=5), 2)
    again = Scenario.from_json(scenario.to_json())
    assert again.to_json() == scenario.to_json()
    assert enumerate_tuples(again) == enumerate_tuples(scenario)


def test_config_errors():
    with pytest.raises(ScenarioError):
        generate_scenario(ScenarioConfig(n_users=0))
    with pytest.raises(ScenarioError):
        ScenarioConfig.from_dict({"n_userz": 3})
    with pytest.raises(ScenarioError):
        generate_scenario(ScenarioConfig(n_sbs=2, cache_bytes=[1e9]))


def test_heterogeneous_cache_preserves_mean():
    cfg = ScenarioConfig(n_sbs=6, n_users=5, n_files=5, cache_bytes=2e9, cache_spread=0.5)
    scenario = generate_scenario(cfg, 4)
    caches = [scenario.transmitters[n].cache_bits for n in scenario.sbs]
    assert np.mean(caches) == pytest.approx(2e9 * 8)
    assert min(caches) >= 0.5 * 2e9 * 8 * (1 - 1e-9) and len(set(caches)) > 1


def test_fig3_tuples(fig3):
    tuples = [(t.tx, t.rx, t.channel) for t in enumerate_tuples(fig3)]
    assert tuples == [(0, 0, 1), (0, 1, 1), (0, 1, 2), (1, 1, 1), (1, 2, 1)]


def test_uncovered_user_gets_only_mbs_tuples():
    cfg = ScenarioConfig(radius_m=400.0, n_sbs=1, n_users=1, n_files=2, n_secondary_channels=2,
                         channels_per_sbs=1, channels_per_user=0, tx_range_m=10.0)
    scenario = generate_scenario(cfg, 0)
    assert {t.tx for t in enumerate_tuples(scenario)} == {scenario.mbs}


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_tuples_in_range_and_bounded(seed):
    cfg = ScenarioConfig(radius_m=200.0, n_sbs=3, n_users=6, n_files=4, n_secondary_channels=3,
                         channels_per_sbs=2, channels_per_user=2)
    scenario = generate_scenario(cfg, seed)
    tuples = enumerate_tuples(scenario)
    assert len(tuples) <= len(scenario.transmitters) * len(scenario.users) * len(scenario.channels)
    radio = scenario.radio
    for t in tuples:
        p = scenario.transmitters[t.tx].tx_power_w
        received = radio.gain * t.distance ** -radio.path_loss * p
        assert received >= radio.rx_threshold_w[t.channel] * (1 - 1e-9)
        assert t.capacity >= scenario.channels[t.channel].bandwidth_hz * math.log2(
            1 + radio.rx_threshold_w[t.channel] / radio.noise_w) * (1 - 1e-9)


def test_demand_bits_exact():
    scenario = generate_scenario(ScenarioConfig(n_sbs=2, n_users=7, n_files=5), 0)
    expected = sum(Fraction(scenario.requests[k, j]) * Fraction(scenario.catalog.sizes_bits[j])
                   for k in range(7) for j in range(5))
    assert scenario.demand_bits() == pytest.approx(float(expected))
