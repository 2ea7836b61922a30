import pytest

from fedalloc.config import KNOWN_KEYS, RAW_RHO, ScenarioConfig, from_mapping, load_config
from fedalloc.errors import ConfigError
from fedalloc.scenario import device_count, generate_scenario


def test_minimal_file_gets_default_preset(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("seed: 42\n")
    cfg = load_config(path)
    assert cfg == ScenarioConfig(seed=42)
    assert (cfg.n_devices, cfg.b_cycles, cfg.c_payload, cfg.t_max, cfg.f_max, cfg.e_up_max) == \
        (10, 40.0, 4500.0, 4.0, 2.0, 20.0)
    assert cfg.w_time == cfg.w_energy == 0.5


def test_weight_autofill_and_conflict():
    assert from_mapping({"seed": 1, "w_time": 0.7}).w_energy == pytest.approx(0.3)
    assert from_mapping({"seed": 1, "w_energy": 0.2}).w_time == pytest.approx(0.8)
    with pytest.raises(ConfigError, match="w_"):
        from_mapping({"seed": 1, "w_time": 0.7, "w_energy": 0.7})


@pytest.mark.parametrize("raw, key", [
    ({"seed": 1, "bogus": 3}, "bogus"),
    ({"w_time": 0.5}, "seed"),
    ({"seed": -1}, "seed"),
    ({"seed": 1, "t_max": 0}, "t_max"),
    ({"seed": 1, "dataset_range": [10, 5]}, "dataset_range"),
    ({"seed": 1, "methods": "proposed,nope"}, "methods"),
    ({"seed": 1, "power_preset": "turbo"}, "power_preset"),
])
def test_validation_names_offending_key(raw, key):
    with pytest.raises(ConfigError, match=key):
        from_mapping(raw)


def test_nested_keys_reach_their_sections():
    cfg = from_mapping({"seed": 1, "delta_ip_max": 0.5, "penalty_delta": 0.01, "outer_max": 7})
    assert cfg.channel.delta_ip_max == 0.5
    assert cfg.solver.harmony.penalty_delta == 0.01
    assert cfg.solver.outer_max == 7
    assert {"delta_ip_max", "penalty_delta", "outer_max", "seed"} <= KNOWN_KEYS


def test_power_presets_and_methods_string():
    assert from_mapping({"seed": 1, "power_preset": "raw"}).rho == RAW_RHO
    cfg = from_mapping({"seed": 1, "methods": "proposed, random_all"})
    assert cfg.methods == ("proposed", "random_all")


def test_parse_error_and_non_mapping(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("seed: [1\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(lst)


def test_poisson_device_count_golden():
    cfg = from_mapping({"seed": 42, "arrival_rate": 3})
    assert cfg.n_devices is None
    assert device_count(cfg) == 6
    assert len(generate_scenario(cfg)) == 6


def test_scenario_deterministic_and_in_range():
    cfg = from_mapping({"seed": 9})
    a, b = generate_scenario(cfg), generate_scenario(cfg)
    assert a == b
    assert all(5e6 <= d.d_size <= 10e6 and d.sigma > 0 for d in a)


def test_device_identity_independent_of_population():
    small = generate_scenario(from_mapping({"seed": 4, "n_devices": 3}))
    large = generate_scenario(from_mapping({"seed": 4, "n_devices": 8}))
    assert small == large[:3]
