"""Shared fixtures for the quantrack test suite."""

import os
from pathlib import Path

import json5
import numpy as np
import pytest

from quantrack.config import ScenarioConfig
from quantrack.sim import build_scenario

SCENARIOS = Path(__file__).parent / "scenarios"

# Ring-network leader and its real Jordan form; robot plants after ZOH
S_RING = np.array([[1.1052, 0.1105], [0.0, 1.1052]])
S_BAR_RING = np.array([[1.1052, 1.0], [0.0, 1.1052]])
S_BAR_ROBOT = np.array([[1.0, 1.0], [0.0, 1.0]])
A_ROBOT = np.array([[1.0, 0.0990], [0.0, 0.9802]])
B_ROBOT = np.array([[0.004967], [0.09901]])
K_ROBOT = np.array([[-77.2624, -13.5990]])


@pytest.fixture(autouse=True)
def isolated_output(tmp_path, monkeypatch):
    """Keep Settings from creating ./out during tests"""
    monkeypatch.setenv("QUANTRACK_OUT_DIR", str(tmp_path / "out"))
    monkeypatch.setenv("QUANTRACK_NO_PLOTS", "true")
    monkeypatch.delenv("QUANTRACK_WORKERS", raising=False)


@pytest.fixture
def scenario_path():
    def _path(name: str) -> str:
        return str(SCENARIOS / f"{name}.json5")
    return _path


@pytest.fixture
def load_scenario(scenario_path):
    def _load(name: str, **overrides):
        config = ScenarioConfig.load(scenario_path(name))
        if overrides:
            config = config.with_overrides(**overrides)
        return build_scenario(config)
    return _load


@pytest.fixture
def small_config_dict():
    """Two scalar followers on a pinned path, unstable scalar leader, light DoS"""
    return {
        "name": "small",
        "run": {"delta": 0.1, "horizon": 8.0, "quantization": True, "convergence_ratio": 0.05},
        "leader": {"S": [[1.05]], "v0": [1.0]},
        "agent_defaults": {"A": [[1.0]], "B": [[1.0]], "C": [[1.0]], "K": [[-0.5]]},
        "followers": [{"x0": [2.0]}, {"x0": [-3.0]}],
        "graph": {"adjacency": [[0, 1], [1, 0]], "pinning": [1, 0]},
        "observer": {"kbar": [[0.5]]},
        "codec": {"gamma1": 0.9, "gamma2": 1.1, "sigma": 1.0, "levels": 127, "rates": [1]},
        "dos": {"enabled": True, "target": 0.2, "seed": 1},
    }


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name: str = "scenario.json5") -> str:
        path = tmp_path / name
        path.write_text(json5.dumps(data, indent=2))
        return str(path)
    return _write


@pytest.fixture
def small_config_path(write_config, small_config_dict):
    return write_config(small_config_dict, "small.json5")
