import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relay_beamform.scenario import (ChannelSet, ScenarioConfig, ScenarioError, load_scenario,
                                     sample_channels, save_scenario, scenario_to_dict)


def test_paper_setup_shapes():
    cfg = ScenarioConfig(R=10, M=3, N=3, P_p=1, P_s=1, seed=7)
    ch = sample_channels(cfg)
    assert ch.H.shape == (10, 3)
    assert ch.g.shape == (10,)
    assert ch.Hhat.shape == (3, 10)
    assert ch.ghat.shape == (10,)
    for a in (ch.H, ch.g, ch.Hhat, ch.ghat):
        assert np.all(np.isfinite(a))


def test_same_seed_same_channels():
    cfg = ScenarioConfig(R=10, M=3, N=3, P_p=1, P_s=1, seed=7)
    a, b = sample_channels(cfg), sample_channels(cfg)
    assert a == b
    assert np.array_equal(a.H, b.H) and np.array_equal(a.ghat, b.ghat)


def test_unit_variance_large_sample():
    cfg = ScenarioConfig(R=10**4, M=3, N=3, P_p=1, P_s=1, seed=1)
    ch = sample_channels(cfg)
    for a in (ch.H, ch.g, ch.Hhat, ch.ghat):
        assert abs(np.mean(np.abs(a) ** 2) - 1.0) < 0.03
        # circular symmetry: real and imaginary parts carry half the power each
        assert abs(np.mean(a.real**2) - 0.5) < 0.03


def test_distinct_seeds_differ():
    base = ScenarioConfig(R=4, M=2, N=2, P_p=1, P_s=1)
    for s in range(100):
        a = sample_channels(base.replace(seed=2 * s))
        b = sample_channels(base.replace(seed=2 * s + 1))
        assert a != b


@pytest.mark.parametrize("kw", [
    dict(R=0), dict(M=2, N=3), dict(P_p=0.0), dict(P_s=-1.0), dict(sigma_n2=0.0),
    dict(I_p=float("nan")), dict(P_t=0.0), dict(R=2.5), dict(seed=-1),
])
def test_config_rejects_invalid(kw):
    base = dict(R=2, M=2, N=2, P_p=1.0, P_s=1.0)
    base.update(kw)
    with pytest.raises(ScenarioError):
        ScenarioConfig(**base)


def test_round_trip(tmp_path):
    cfg = ScenarioConfig(R=5, M=2, N=2, P_p=3.1, P_s=0.7, sigma_n2=1.3, I_p=0.1, P_t=12.0,
                         seed=2**63 + 5)
    ch = sample_channels(cfg)
    p = tmp_path / "s.json"
    save_scenario(cfg, ch, p)
    cfg2, ch2 = load_scenario(p)
    assert cfg2 == cfg
    assert ch2 == ch


def test_round_trip_many(tmp_path):
    rng = np.random.default_rng(0)
    p = tmp_path / "s.json"
    for _ in range(100):
        k = int(rng.integers(1, 4))
        cfg = ScenarioConfig(R=int(rng.integers(1, 8)), M=k, N=k,
                             P_p=float(rng.uniform(0.01, 10)), P_s=float(rng.uniform(0.01, 10)),
                             sigma_n2=float(rng.uniform(0.1, 2)), I_p=float(rng.uniform(0.01, 5)),
                             P_t=float(rng.uniform(0.1, 100)), seed=int(rng.integers(0, 2**63)))
        ch = sample_channels(cfg)
        save_scenario(cfg, ch, p)
        assert load_scenario(p) == (cfg, ch)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300),
                min_size=4, max_size=4))
def test_round_trip_exact_values(tmp_path_factory, vals):
    cfg = ScenarioConfig(R=1, M=1, N=1, P_p=1, P_s=1)
    ch = ChannelSet(H=[[vals[0]]], g=[vals[1]], Hhat=[[vals[2]]], ghat=[vals[3]])
    p = tmp_path_factory.mktemp("rt") / "s.json"
    save_scenario(cfg, ch, p)
    assert load_scenario(p)[1] == ch


def test_dimension_mismatch_rejected(tmp_path):
    cfg = ScenarioConfig(R=3, M=2, N=2, P_p=1, P_s=1)
    doc = scenario_to_dict(cfg, sample_channels(cfg))
    for part in ("H_re", "H_im"):
        doc["channels"][part] = [row + [0.0] for row in doc["channels"][part]]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="dimension"):
        load_scenario(p)


def test_truncated_file_rejected(tmp_path):
    cfg = ScenarioConfig(R=3, M=2, N=2, P_p=1, P_s=1)
    p = tmp_path / "s.json"
    save_scenario(cfg, sample_channels(cfg), p)
    text = p.read_text()
    p.write_text(text[: len(text) // 2])
    with pytest.raises(ScenarioError):
        load_scenario(p)


def test_schema_version_checked(tmp_path):
    cfg = ScenarioConfig(R=2, M=1, N=1, P_p=1, P_s=1)
    doc = scenario_to_dict(cfg, sample_channels(cfg))
    doc["schema_version"] = 2
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="schema_version"):
        load_scenario(p)


def test_missing_file():
    with pytest.raises(OSError):
        load_scenario("/nonexistent/scenario.json")


def test_channels_are_read_only():
    ch = sample_channels(ScenarioConfig(R=2, M=1, N=1, P_p=1, P_s=1))
    with pytest.raises(ValueError):
        ch.H[0, 0] = 0
