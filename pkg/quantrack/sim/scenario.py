"""Assembly of a runnable scenario from its configuration."""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..config import ScenarioConfig
from ..dos import DosSignal, generate_random
from ..errors import ConfigError, DimensionError, DosSignalError, QuantrackError, TopologyError
from ..lin_core import JordanDecomposition, discretize_zoh, real_jordan_form, spectral_radius
from ..quantizers import FollowerQuantizerSpec, LeaderQuantizerSpec
from ..topology import FollowerGraph, StackedGains, build_gain_matrices
from .agents import AgentModel, LeaderModel

logger = logging.getLogger('Scenario')


@dataclass
class Scenario:
    """Everything a simulation needs, derived from a ScenarioConfig.

    Model objects hold the initial state; ``simulate`` works on copies.
    """
    config: ScenarioConfig
    S: np.ndarray
    v0: np.ndarray
    dec: JordanDecomposition
    agents: List[AgentModel]
    graph: FollowerGraph
    k_bar: np.ndarray
    gains: StackedGains
    dos: DosSignal
    follower_spec: FollowerQuantizerSpec
    leader_spec: LeaderQuantizerSpec
    theta0: float
    omega0: np.ndarray
    c_x0: float
    warnings: List[str] = field(default_factory=list)

    @property
    def delta(self) -> float:
        return self.config.run.delta

    @property
    def steps(self) -> int:
        return self.config.run.steps

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_v(self) -> int:
        return self.v0.shape[0]

    @property
    def quantized(self) -> bool:
        return self.config.run.quantization

    @property
    def speed_step_index(self) -> int:
        """Step at which the leader jumps, or -1"""
        ss = self.config.leader.speed_step
        return -1 if ss is None else int(round(ss.time / self.delta))

    def leader(self) -> LeaderModel:
        return LeaderModel(S=self.S, v=self.v0.copy(), dec=self.dec)

    def fresh_agents(self) -> List[AgentModel]:
        return [AgentModel(A=a.A, B=a.B, C=a.C, K=a.K, F=a.F, V=a.V, x=a.x.copy()) for a in self.agents]


def load_dos(config: ScenarioConfig) -> DosSignal:
    """Resolve the DoS section: a signal file, a seeded generator or nothing"""
    run, dos = config.run, config.dos
    if not dos.enabled:
        return DosSignal.empty(run.delta, run.horizon)
    if dos.signal_file is not None:
        return DosSignal.load(config.resolve_path(dos.signal_file), run.delta, run.horizon)
    return generate_random(dos.target, run.delta, run.horizon, dos.seed, dos.duty_share)


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Build models, decomposition, gains and DoS signal for a config.

    Raises:
        ConfigError: If any part of the configuration is inconsistent; the
            dotted path names the offending section
        JordanDecompositionError: If S has no reliable real Jordan form
    """
    run = config.run
    warnings: List[str] = []

    S = np.array(config.leader.S, dtype=float)
    if config.leader.continuous:
        S, _ = discretize_zoh(S, None, run.delta)
    dec = real_jordan_form(S)
    rho_s = spectral_radius(S)
    if rho_s < 1:
        warnings.append(f"rho(S) = {rho_s:.6g} < 1; the leader is not persistently exciting")

    v0 = np.array(config.leader.v0, dtype=float)
    if config.leader.c_v0 is not None and np.max(np.abs(v0)) > config.leader.c_v0:
        raise ConfigError("leader.c_v0", f"|v0|_inf = {np.max(np.abs(v0)):.6g} exceeds the bound")

    agents = []
    for i, f in enumerate(config.followers):
        A, B = np.array(f.A, dtype=float), np.array(f.B, dtype=float)
        if f.continuous:
            A, B = discretize_zoh(A, B, run.delta)
        try:
            agent = AgentModel.build(A, B, f.C, f.K, f.x0, S)
        except QuantrackError as e:
            raise ConfigError(f"followers[{i}]", str(e))
        if agent.closed_loop_radius >= 1:
            raise ConfigError(f"followers[{i}].K",
                              f"A + B K is not Schur stable (rho = {agent.closed_loop_radius:.6g})")
        agents.append(agent)

    try:
        graph = FollowerGraph(np.array(config.graph.adjacency), np.array(config.graph.pinning))
    except TopologyError as e:
        raise ConfigError("graph", str(e))
    k_bar = np.array(config.observer.kbar, dtype=float)
    gains = build_gain_matrices(graph, dec.S_bar, k_bar)
    if not gains.schur_stable:
        warnings.append("some observer mode S_bar - lambda_i Kbar is not Schur stable")

    codec = config.codec
    try:
        leader_spec = LeaderQuantizerSpec.from_blocks(dec.blocks, codec.rates)
    except (DimensionError, ValueError) as e:
        raise ConfigError("codec.rates", str(e))
    follower_spec = FollowerQuantizerSpec(levels=codec.levels, sigma=codec.sigma)

    v_bar0 = dec.to_bar(v0, 0)
    c_x0 = codec.c_x0
    if c_x0 is None:
        c_x0 = max(max(float(np.max(np.abs(a.x))) for a in agents), float(np.max(np.abs(v_bar0))))
    floor_theta = c_x0 * codec.gamma1 / codec.sigma
    theta0 = floor_theta if codec.theta0 is None else codec.theta0
    if theta0 < floor_theta:
        warnings.append(f"theta0 = {theta0:.6g} below C_x0 gamma1 / sigma = {floor_theta:.6g}")

    if codec.omega0 is None:
        floor = 1e-3 * max(1.0, float(np.max(np.abs(v_bar0))))
        omega0 = np.maximum(1.1 * np.abs(v_bar0), floor)
    else:
        omega0 = np.array(codec.omega0, dtype=float)
        if np.any(omega0 <= np.abs(v_bar0)):
            raise ConfigError("codec.omega0", "must exceed |v_bar(0)| elementwise")

    try:
        dos = load_dos(config)
    except DosSignalError as e:
        raise ConfigError("dos", str(e))

    for w in warnings:
        logger.warning(w)

    return Scenario(
        config=config, S=S, v0=v0, dec=dec, agents=agents, graph=graph, k_bar=k_bar,
        gains=gains, dos=dos, follower_spec=follower_spec, leader_spec=leader_spec,
        theta0=float(theta0), omega0=omega0, c_x0=float(c_x0), warnings=warnings,
    )
