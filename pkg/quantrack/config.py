"""Configuration management for quantrack.

Scenario files are JSON5 documents; process settings come from the
environment (optionally a ``.env`` file).
"""

import os
import math
import logging
from pathlib import Path
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import json5
from dotenv import load_dotenv

from .errors import ConfigError

# Load environment variables
load_dotenv()

logger = logging.getLogger('ScenarioConfig')

Vector = Tuple[float, ...]
Matrix = Tuple[Vector, ...]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    return value


def _vector(value: Any, path: str) -> Vector:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(path, "expected a non-empty list of numbers")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _matrix(value: Any, path: str) -> Matrix:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(path, "expected a non-empty list of rows")
    rows = tuple(_vector(row, f"{path}[{i}]") for i, row in enumerate(value))
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ConfigError(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
    return rows


def _shape(m: Matrix) -> Tuple[int, int]:
    return len(m), len(m[0])


def _expect_shape(m: Matrix, shape: Tuple[int, int], path: str):
    if _shape(m) != shape:
        raise ConfigError(path, f"shape {_shape(m)} does not match expected {shape}")


def _section(data: Dict[str, Any], key: str, required: bool = True) -> Dict[str, Any]:
    value = data.get(key)
    if value is None:
        if required:
            raise ConfigError(key, "section is missing")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(key, "expected an object")
    return value


def _lists(m: Matrix):
    return [list(row) for row in m]


@dataclass(frozen=True)
class RunConfig:
    """Time grid and run switches"""
    delta: float = 0.1
    horizon: float = 20.0
    quantization: bool = True
    convergence_ratio: float = 1e-2
    divergence_cap: float = 1e12

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.delta))


@dataclass(frozen=True)
class SpeedStep:
    """Additive jump of the leader state at a given time"""
    time: float
    jump: Vector


@dataclass(frozen=True)
class LeaderConfig:
    S: Matrix
    v0: Vector
    c_v0: Optional[float] = None
    continuous: bool = False
    speed_step: Optional[SpeedStep] = None

    @property
    def n_v(self) -> int:
        return len(self.v0)


@dataclass(frozen=True)
class FollowerConfig:
    A: Matrix
    B: Matrix
    C: Matrix
    K: Matrix
    x0: Vector
    continuous: bool = False


@dataclass(frozen=True)
class GraphConfig:
    adjacency: Matrix
    pinning: Vector


@dataclass(frozen=True)
class ObserverConfig:
    kbar: Matrix


@dataclass(frozen=True)
class CodecConfig:
    """Quantizer and zooming parameters.

    ``rates`` holds one entry per Jordan block of S; a single entry is
    broadcast to every block. ``theta0``, ``omega0`` and ``c_x0`` are
    derived from the initial states when left unset.
    """
    gamma1: float
    gamma2: float
    sigma: float = 1.0
    levels: int = 127
    rates: Vector = (1.0,)
    theta0: Optional[float] = None
    omega0: Optional[Vector] = None
    c_x0: Optional[float] = None


@dataclass(frozen=True)
class DosConfig:
    enabled: bool = False
    signal_file: Optional[str] = None
    target: Optional[float] = None
    seed: int = 0
    duty_share: float = 0.6


@dataclass(frozen=True)
class ScenarioConfig:
    """A complete, validated scenario"""
    name: str
    run: RunConfig
    leader: LeaderConfig
    followers: Tuple[FollowerConfig, ...]
    graph: GraphConfig
    observer: ObserverConfig
    codec: CodecConfig
    dos: DosConfig = DosConfig()
    base_dir: str = field(default=".", compare=False)

    @property
    def n_agents(self) -> int:
        return len(self.followers)

    @classmethod
    def load(cls, path: str) -> "ScenarioConfig":
        """Parse and validate a JSON5 scenario file.

        Raises:
            ConfigError: If the file cannot be read or parsed, or any field
                fails validation
        """
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(str(path), f"cannot read file: {str(e)}")
        try:
            data = json5.loads(text)
        except ValueError as e:
            # json5 reports line and column in the message
            raise ConfigError(str(path), f"parse error: {str(e)}")
        return cls.from_dict(data, base_dir=str(Path(path).resolve().parent))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: str = ".") -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected an object")

        run_d = _section(data, "run", required=False)
        if "seed" in run_d:
            raise ConfigError("run.seed", "the attack generator seed belongs in dos.seed")
        run = RunConfig(
            delta=_number(run_d.get("delta", 0.1), "run.delta"),
            horizon=_number(run_d.get("horizon", 20.0), "run.horizon"),
            quantization=bool(run_d.get("quantization", True)),
            convergence_ratio=_number(run_d.get("convergence_ratio", 1e-2), "run.convergence_ratio"),
            divergence_cap=_number(run_d.get("divergence_cap", 1e12), "run.divergence_cap"),
        )
        if run.delta <= 0:
            raise ConfigError("run.delta", "must be positive")
        if run.horizon < run.delta:
            raise ConfigError("run.horizon", "must cover at least one step")
        if not 0 < run.convergence_ratio < 1:
            raise ConfigError("run.convergence_ratio", "must lie in (0, 1)")

        leader_d = _section(data, "leader")
        if "S" not in leader_d or "v0" not in leader_d:
            raise ConfigError("leader", "S and v0 are required")
        S = _matrix(leader_d["S"], "leader.S")
        v0 = _vector(leader_d["v0"], "leader.v0")
        n_v = len(v0)
        _expect_shape(S, (n_v, n_v), "leader.S")
        speed_step = None
        if leader_d.get("speed_step") is not None:
            ss = leader_d["speed_step"]
            if not isinstance(ss, dict) or "time" not in ss or "jump" not in ss:
                raise ConfigError("leader.speed_step", "expected {time, jump}")
            jump = _vector(ss["jump"], "leader.speed_step.jump")
            if len(jump) != n_v:
                raise ConfigError("leader.speed_step.jump", f"expected {n_v} entries")
            speed_step = SpeedStep(time=_number(ss["time"], "leader.speed_step.time"), jump=jump)
        c_v0 = leader_d.get("c_v0")
        leader = LeaderConfig(
            S=S,
            v0=v0,
            c_v0=None if c_v0 is None else _number(c_v0, "leader.c_v0"),
            continuous=bool(leader_d.get("continuous", False)),
            speed_step=speed_step,
        )

        defaults = _section(data, "agent_defaults", required=False)
        followers_d = data.get("followers")
        if not isinstance(followers_d, list) or not followers_d:
            raise ConfigError("followers", "expected a non-empty list")
        followers = tuple(
            cls._parse_follower({**defaults, **(f or {})}, f"followers[{i}]", n_v)
            for i, f in enumerate(followers_d)
        )
        n_agents = len(followers)

        graph_d = _section(data, "graph")
        adjacency = _matrix(graph_d.get("adjacency"), "graph.adjacency")
        _expect_shape(adjacency, (n_agents, n_agents), "graph.adjacency")
        pinning = _vector(graph_d.get("pinning"), "graph.pinning")
        if len(pinning) != n_agents:
            raise ConfigError("graph.pinning", f"expected {n_agents} entries")
        graph = GraphConfig(adjacency=adjacency, pinning=pinning)

        observer_d = _section(data, "observer")
        kbar = _matrix(observer_d.get("kbar"), "observer.kbar")
        _expect_shape(kbar, (n_v, n_v), "observer.kbar")
        observer = ObserverConfig(kbar=kbar)

        codec = cls._parse_codec(_section(data, "codec"), n_v)
        dos = cls._parse_dos(_section(data, "dos", required=False))

        return cls(
            name=str(data.get("name", "scenario")),
            run=run,
            leader=leader,
            followers=followers,
            graph=graph,
            observer=observer,
            codec=codec,
            dos=dos,
            base_dir=base_dir,
        )

    @staticmethod
    def _parse_follower(d: Dict[str, Any], path: str, n_v: int) -> FollowerConfig:
        for key in ("A", "B", "C", "K", "x0"):
            if key not in d:
                raise ConfigError(f"{path}.{key}", "missing (and no agent_defaults entry)")
        A = _matrix(d["A"], f"{path}.A")
        n = len(A)
        _expect_shape(A, (n, n), f"{path}.A")
        B = _matrix(d["B"], f"{path}.B")
        if len(B) != n:
            raise ConfigError(f"{path}.B", f"expected {n} rows")
        m = len(B[0])
        C = _matrix(d["C"], f"{path}.C")
        _expect_shape(C, (n_v, n), f"{path}.C")
        K = _matrix(d["K"], f"{path}.K")
        _expect_shape(K, (m, n), f"{path}.K")
        x0 = _vector(d["x0"], f"{path}.x0")
        if len(x0) != n:
            raise ConfigError(f"{path}.x0", f"expected {n} entries")
        return FollowerConfig(A=A, B=B, C=C, K=K, x0=x0, continuous=bool(d.get("continuous", False)))

    @staticmethod
    def _parse_codec(d: Dict[str, Any], n_v: int) -> CodecConfig:
        for key in ("gamma1", "gamma2"):
            if key not in d:
                raise ConfigError(f"codec.{key}", "is required")
        gamma1 = _number(d["gamma1"], "codec.gamma1")
        gamma2 = _number(d["gamma2"], "codec.gamma2")
        if not 0 < gamma1 < 1:
            raise ConfigError("codec.gamma1", "must lie in (0, 1)")
        if gamma2 <= 1:
            raise ConfigError("codec.gamma2", "must exceed 1")
        sigma = _number(d.get("sigma", 1.0), "codec.sigma")
        if sigma <= 0:
            raise ConfigError("codec.sigma", "must be positive")
        levels = d.get("levels", 127)
        if isinstance(levels, bool) or not isinstance(levels, int) or levels < 1:
            raise ConfigError("codec.levels", "must be an integer >= 1")
        rates = _vector(d.get("rates", 1.0), "codec.rates")
        if any(r < 0 for r in rates):
            raise ConfigError("codec.rates", "must be nonnegative")
        theta0 = d.get("theta0")
        if theta0 is not None:
            theta0 = _number(theta0, "codec.theta0")
            if theta0 <= 0:
                raise ConfigError("codec.theta0", "must be positive")
        omega0 = d.get("omega0")
        if omega0 is not None:
            omega0 = _vector(omega0, "codec.omega0")
            if len(omega0) != n_v:
                raise ConfigError("codec.omega0", f"expected {n_v} entries")
            if any(w <= 0 for w in omega0):
                raise ConfigError("codec.omega0", "entries must be positive")
        c_x0 = d.get("c_x0")
        if c_x0 is not None:
            c_x0 = _number(c_x0, "codec.c_x0")
        return CodecConfig(
            gamma1=gamma1, gamma2=gamma2, sigma=sigma, levels=levels, rates=rates,
            theta0=theta0, omega0=omega0, c_x0=c_x0,
        )

    @staticmethod
    def _parse_dos(d: Dict[str, Any]) -> DosConfig:
        enabled = bool(d.get("enabled", False))
        signal_file = d.get("signal_file")
        target = d.get("target")
        if target is not None:
            target = _number(target, "dos.target")
            if not 0 <= target < 1:
                raise ConfigError("dos.target", "must lie in [0, 1)")
        if enabled and signal_file is None and target is None:
            raise ConfigError("dos", "enabled but neither signal_file nor target given")
        duty_share = _number(d.get("duty_share", 0.6), "dos.duty_share")
        if not 0 <= duty_share <= 1:
            raise ConfigError("dos.duty_share", "must lie in [0, 1]")
        return DosConfig(
            enabled=enabled,
            signal_file=None if signal_file is None else str(signal_file),
            target=target,
            seed=int(d.get("seed", 0)),
            duty_share=duty_share,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to a plain document that ``from_dict`` maps back to an equal config"""
        leader: Dict[str, Any] = {
            "S": _lists(self.leader.S),
            "v0": list(self.leader.v0),
            "continuous": self.leader.continuous,
        }
        if self.leader.c_v0 is not None:
            leader["c_v0"] = self.leader.c_v0
        if self.leader.speed_step is not None:
            leader["speed_step"] = {
                "time": self.leader.speed_step.time,
                "jump": list(self.leader.speed_step.jump),
            }
        codec: Dict[str, Any] = {
            "gamma1": self.codec.gamma1,
            "gamma2": self.codec.gamma2,
            "sigma": self.codec.sigma,
            "levels": self.codec.levels,
            "rates": list(self.codec.rates),
        }
        for key in ("theta0", "c_x0"):
            if getattr(self.codec, key) is not None:
                codec[key] = getattr(self.codec, key)
        if self.codec.omega0 is not None:
            codec["omega0"] = list(self.codec.omega0)
        dos: Dict[str, Any] = {
            "enabled": self.dos.enabled,
            "seed": self.dos.seed,
            "duty_share": self.dos.duty_share,
        }
        if self.dos.signal_file is not None:
            dos["signal_file"] = self.dos.signal_file
        if self.dos.target is not None:
            dos["target"] = self.dos.target
        return {
            "name": self.name,
            "run": {
                "delta": self.run.delta,
                "horizon": self.run.horizon,
                "quantization": self.run.quantization,
                "convergence_ratio": self.run.convergence_ratio,
                "divergence_cap": self.run.divergence_cap,
            },
            "leader": leader,
            "followers": [
                {
                    "A": _lists(f.A), "B": _lists(f.B), "C": _lists(f.C), "K": _lists(f.K),
                    "x0": list(f.x0), "continuous": f.continuous,
                }
                for f in self.followers
            ],
            "graph": {"adjacency": _lists(self.graph.adjacency), "pinning": list(self.graph.pinning)},
            "observer": {"kbar": _lists(self.observer.kbar)},
            "codec": codec,
            "dos": dos,
        }

    def dumps(self) -> str:
        return json5.dumps(self.to_dict(), indent=2)

    def resolve_path(self, relative: str) -> str:
        return str(Path(self.base_dir) / relative)

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        """Return a copy with dotted-path fields replaced.

        Supported keys: ``gamma1``, ``gamma2``, ``rates``, ``dos_target``,
        ``seed``.

        Raises:
            ConfigError: For unknown override keys
        """
        config = self
        for key, value in overrides.items():
            if key in ("gamma1", "gamma2"):
                config = replace(config, codec=replace(config.codec, **{key: float(value)}))
            elif key == "rates":
                config = replace(config, codec=replace(config.codec, rates=_vector(value, "rates")))
            elif key == "dos_target":
                config = replace(config, dos=replace(
                    config.dos, enabled=True, signal_file=None, target=_number(value, "dos_target")))
            elif key == "seed":
                config = replace(config, dos=replace(config.dos, seed=int(value)))
            else:
                raise ConfigError(key, "unknown override")
        return config


@dataclass
class Settings:
    """Process-level settings read from the environment"""
    out_dir: str = "out"
    log_level: str = "INFO"
    workers: int = 4
    no_plots: bool = False

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            out_dir=os.getenv("QUANTRACK_OUT_DIR", "out"),
            log_level=os.getenv("QUANTRACK_LOG_LEVEL", "INFO").upper(),
            workers=int(os.getenv("QUANTRACK_WORKERS", "4")),
            no_plots=os.getenv("QUANTRACK_NO_PLOTS", "false").lower() == "true",
        )

    def __post_init__(self):
        """Ensure output directory exists"""
        os.makedirs(self.out_dir, exist_ok=True)
