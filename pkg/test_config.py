"""Tests for scenario files and process settings."""

import pytest

from quantrack.config import ScenarioConfig, Settings
from quantrack.errors import ConfigError


def test_reference_scenarios_parse(scenario_path):
    for name in ("ring_certified", "ring_bottleneck", "baseline", "ceiling_ok",
                 "ceiling_overflow", "robots_dos", "robots_step_quantized",
                 "robots_step_unquantized"):
        config = ScenarioConfig.load(scenario_path(name))
        assert config.name == name
        assert config.n_agents == 4


def test_agent_defaults_are_merged(small_config_dict):
    small_config_dict["followers"][1]["K"] = [[-0.3]]
    config = ScenarioConfig.from_dict(small_config_dict)
    assert config.followers[0].K == ((-0.5,),)
    assert config.followers[1].K == ((-0.3,),)
    assert config.followers[1].A == ((1.0,),)


def test_serialized_config_loads_back(write_config, scenario_path):
    """Saved scenario files describe the same run"""
    config = ScenarioConfig.load(scenario_path("robots_step_quantized"))
    path = write_config(config.to_dict(), "copy.json5")
    again = ScenarioConfig.load(path)
    assert again == config
    assert again.leader.speed_step.time == 25
    assert again.leader.continuous


def test_defaults(small_config_dict):
    del small_config_dict["run"]
    config = ScenarioConfig.from_dict(small_config_dict)
    assert config.run.delta == 0.1
    assert config.run.steps == 200
    assert config.codec.theta0 is None and config.codec.omega0 is None


@pytest.mark.parametrize("section, key, value, path", [
    ("codec", "gamma1", 1.0, "codec.gamma1"),
    ("codec", "gamma2", 0.9, "codec.gamma2"),
    ("codec", "sigma", 0.0, "codec.sigma"),
    ("codec", "levels", 2.5, "codec.levels"),
    ("codec", "rates", [-1], "codec.rates"),
    ("codec", "omega0", [1.0, 1.0], "codec.omega0"),
    ("run", "delta", -0.1, "run.delta"),
    ("run", "convergence_ratio", 1.5, "run.convergence_ratio"),
    ("dos", "target", 1.0, "dos.target"),
    ("dos", "duty_share", 2.0, "dos.duty_share"),
    ("leader", "v0", [1.0, 2.0], "leader.S"),
    ("observer", "kbar", [[0.5, 0.0]], "observer.kbar"),
])
def test_invalid_fields_name_their_path(small_config_dict, section, key, value, path):
    small_config_dict[section][key] = value
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(small_config_dict)
    assert excinfo.value.path == path


def test_missing_follower_field(small_config_dict):
    del small_config_dict["agent_defaults"]["K"]
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(small_config_dict)
    assert excinfo.value.path == "followers[0].K"


def test_enabled_dos_needs_a_source(small_config_dict):
    small_config_dict["dos"] = {"enabled": True}
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(small_config_dict)
    assert excinfo.value.path == "dos"


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        ScenarioConfig.load(str(tmp_path / "missing.json5"))
    broken = tmp_path / "broken.json5"
    broken.write_text("{ name: 'x', run: { ")
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.load(str(broken))
    assert "parse error" in str(excinfo.value)


def test_overrides(small_config_dict):
    config = ScenarioConfig.from_dict(small_config_dict)
    changed = config.with_overrides(gamma1=0.95, rates=[2], dos_target=0.3, seed=9)
    assert changed.codec.gamma1 == 0.95
    assert changed.codec.rates == (2.0,)
    assert changed.dos.target == 0.3 and changed.dos.enabled
    assert changed.dos.seed == 9
    assert config.codec.gamma1 == 0.9
    with pytest.raises(ConfigError):
        config.with_overrides(levels=3)


def test_generator_seed_lives_in_dos_section(small_config_dict):
    config = ScenarioConfig.from_dict(small_config_dict)
    assert not hasattr(config.run, "seed")
    assert "seed" not in config.to_dict()["run"]
    assert config.to_dict()["dos"]["seed"] == 1

    small_config_dict["run"]["seed"] = 4
    with pytest.raises(ConfigError) as excinfo:
        ScenarioConfig.from_dict(small_config_dict)
    assert excinfo.value.path == "run.seed"


def test_signal_file_resolves_next_to_scenario(scenario_path):
    config = ScenarioConfig.load(scenario_path("ring_certified"))
    assert config.resolve_path(config.dos.signal_file).endswith("ring_dos.txt")


def test_settings_from_env(monkeypatch, tmp_path):
    out = tmp_path / "runs"
    monkeypatch.setenv("QUANTRACK_OUT_DIR", str(out))
    monkeypatch.setenv("QUANTRACK_LOG_LEVEL", "debug")
    monkeypatch.setenv("QUANTRACK_WORKERS", "2")
    monkeypatch.setenv("QUANTRACK_NO_PLOTS", "false")
    settings = Settings.from_env()
    assert settings.out_dir == str(out)
    assert settings.log_level == "DEBUG"
    assert settings.workers == 2
    assert not settings.no_plots
    assert out.is_dir()
