"""Synchronous closed-loop simulation under a DoS signal."""

import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

from ..codec import (
    FollowerCodecState, LeaderCodecState,
    follower_codec_step, leader_codec_step, omega_step, reinflate, theta_step,
)
from ..types import Verdict
from .agents import control_input
from .observer import network_observer_step
from .scenario import Scenario

logger = logging.getLogger('SimEngine')


@dataclass
class SimEvent:
    step: int
    kind: str       # saturation | reinflate | speed_step | divergence_cap
    detail: str = ""


@dataclass
class SimTrace:
    """Per-step record of a run.

    Row k holds the plant and observer states at step k together with the
    codec outputs produced at step k (estimates, theta_k, omega(k)).
    """
    t: np.ndarray
    jam: np.ndarray
    x: List[np.ndarray]            # per agent, (K+1, n_i)
    y: np.ndarray                  # (K+1, N, n_v)
    v: np.ndarray                  # (K+1, n_v)
    v_bar: np.ndarray
    z_bar: np.ndarray              # (K+1, N, n_v)
    z_hat: np.ndarray
    v_hat: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    q_args: np.ndarray             # follower quantizer arguments, zero at k = 0
    q_values: np.ndarray
    follower_codewords: np.ndarray
    leader_args: np.ndarray
    leader_codewords: np.ndarray
    saturated: np.ndarray          # (K+1, N)
    errors: np.ndarray             # (K+1, N), ||y_i - v||
    events: List[SimEvent] = field(default_factory=list)
    verdict: Verdict = Verdict.CONVERGED
    scenario: Optional[Any] = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    @property
    def initial_error(self) -> float:
        return float(np.max(self.errors[0]))

    @property
    def final_error(self) -> float:
        return float(np.max(self.errors[-1]))

    @property
    def saturation_count(self) -> int:
        return int(np.count_nonzero(self.saturated))

    @property
    def max_q_arg(self) -> float:
        return float(np.max(np.abs(self.q_args))) if self.q_args.size else 0.0

    def tail_error(self) -> float:
        tail = max(1, len(self.t) // 20)
        return float(np.max(self.errors[-tail:]))

    def truncate(self, last: int) -> "SimTrace":
        """Keep rows 0..last"""
        n = last + 1
        for name in ("t", "jam", "y", "v", "v_bar", "z_bar", "z_hat", "v_hat", "omega", "theta",
                     "q_args", "q_values", "follower_codewords", "leader_args", "leader_codewords",
                     "saturated", "errors"):
            setattr(self, name, getattr(self, name)[:n])
        self.x = [xi[:n] for xi in self.x]
        return self


def _allocate(scenario: Scenario) -> SimTrace:
    K, N, n_v = scenario.steps, scenario.n_agents, scenario.n_v
    rows = K + 1
    return SimTrace(
        t=np.arange(rows) * scenario.delta,
        jam=np.zeros(rows, dtype=bool),
        x=[np.zeros((rows, a.x.shape[0])) for a in scenario.agents],
        y=np.zeros((rows, N, n_v)),
        v=np.zeros((rows, n_v)),
        v_bar=np.zeros((rows, n_v)),
        z_bar=np.zeros((rows, N, n_v)),
        z_hat=np.zeros((rows, N, n_v)),
        v_hat=np.zeros((rows, n_v)),
        omega=np.zeros((rows, n_v)),
        theta=np.zeros(rows),
        q_args=np.zeros((rows, N, n_v)),
        q_values=np.zeros((rows, N, n_v)),
        follower_codewords=np.zeros((rows, N, n_v), dtype=np.int64),
        leader_args=np.zeros((rows, n_v)),
        leader_codewords=np.zeros((rows, n_v), dtype=np.int64),
        saturated=np.zeros((rows, N), dtype=bool),
        errors=np.zeros((rows, N)),
        scenario=scenario,
    )


def simulate(scenario: Scenario) -> SimTrace:
    """Run the closed loop over the scenario horizon.

    Per step k: the leader (with an optional speed jump) is transformed,
    the jam flag is read, the leader codec and then the follower codecs
    transmit, the trace row is recorded, the observers advance and the
    plants apply u_i(k).

    Follower saturation is recorded and sets the overflow verdict; the run
    continues. Runs whose errors or quantizer arguments exceed the
    divergence cap stop early with the diverged verdict.

    Raises:
        LeaderOverflowError: If the leader codec loses its error bound
    """
    run = scenario.config.run
    K = scenario.steps
    dec = scenario.dec
    s_bar = dec.S_bar
    leader = scenario.leader()
    agents = scenario.fresh_agents()
    N, n_v = scenario.n_agents, scenario.n_v
    jump_step = scenario.speed_step_index

    follower = FollowerCodecState(
        s_bar=s_bar, z_hat=np.zeros((N, n_v)), theta=scenario.theta0,
        gamma1=scenario.config.codec.gamma1, gamma2=scenario.config.codec.gamma2,
        spec=scenario.follower_spec, quantized=scenario.quantized,
    )
    leader_codec = LeaderCodecState(
        v_hat=np.zeros(n_v), omega=scenario.omega0.copy(), s_bar=s_bar, s_tilde=dec.S_tilde,
        spec=scenario.leader_spec, quantized=scenario.quantized,
    )
    z_bar = np.zeros((N, n_v))
    trace = _allocate(scenario)
    saturation_seen = False
    capped = False

    logger.info(f"Simulating '{scenario.config.name}': {K} steps, {N} followers, "
                f"quantization {'on' if scenario.quantized else 'off'}, {len(scenario.dos)} attacks")

    last = K
    for k in range(K + 1):
        if k == jump_step and k > 0:
            leader.v = leader.v + np.array(scenario.config.leader.speed_step.jump)
            trace.events.append(SimEvent(k, "speed_step", f"v += {list(scenario.config.leader.speed_step.jump)}"))
        v_bar = leader.transformed(k)
        jammed = bool(k > 0 and scenario.dos.is_jammed(k))

        if k >= 1:
            if k == jump_step and reinflate(leader_codec, v_bar):
                trace.events.append(SimEvent(k, "reinflate", f"omega -> {leader_codec.omega.tolist()}"))
            lstep = leader_codec_step(leader_codec, v_bar, jammed, step=k)
            omega_step(leader_codec, jammed)
            trace.leader_args[k] = lstep.argument
            if lstep.codewords is not None:
                trace.leader_codewords[k] = lstep.codewords
            for j in range(N):
                fstep = follower_codec_step(follower, j, z_bar[j], jammed)
                trace.q_args[k, j] = fstep.argument
                trace.q_values[k, j] = fstep.values
                if fstep.codewords is not None:
                    trace.follower_codewords[k, j] = fstep.codewords
                trace.saturated[k, j] = fstep.saturated
            theta_step(follower, jammed)
            if trace.saturated[k].any() and not saturation_seen:
                saturation_seen = True
                agents_hit = np.flatnonzero(trace.saturated[k]).tolist()
                trace.events.append(SimEvent(k, "saturation", f"agents {agents_hit}"))
                logger.warning(f"Follower quantizer saturated at step {k} (agents {agents_hit})")

        trace.jam[k] = jammed
        trace.v[k] = leader.v
        trace.v_bar[k] = v_bar
        trace.z_bar[k] = z_bar
        trace.z_hat[k] = follower.z_hat
        trace.v_hat[k] = leader_codec.v_hat
        trace.omega[k] = leader_codec.omega
        trace.theta[k] = follower.theta
        for i, agent in enumerate(agents):
            trace.x[i][k] = agent.x
            trace.y[k, i] = agent.output()
            trace.errors[k, i] = np.linalg.norm(trace.y[k, i] - leader.v)

        row_max = max(float(np.max(trace.errors[k])), float(np.max(np.abs(trace.q_args[k]))))
        if not np.isfinite(row_max) or row_max > run.divergence_cap:
            capped = True
            last = k
            trace.events.append(SimEvent(k, "divergence_cap", f"max magnitude {row_max:.3e}"))
            logger.warning(f"Divergence cap reached at step {k}; stopping")
            break
        if k == K:
            break

        z_bar = network_observer_step(z_bar, follower.z_hat, leader_codec.v_hat,
                                      scenario.graph, s_bar, scenario.k_bar, jammed)
        for agent, z_bar_prev in zip(agents, trace.z_bar[k]):
            z = dec.from_bar(z_bar_prev, k)
            agent.advance(control_input(agent, z))
        leader.advance()

    if last < K:
        trace.truncate(last)
    trace.verdict = _verdict(trace, run.convergence_ratio, capped)
    logger.info(f"Run '{scenario.config.name}' finished: {trace.verdict.value} "
                f"(error {trace.initial_error:.4g} -> {trace.final_error:.4g}, "
                f"{trace.saturation_count} saturated transmissions)")
    return trace


def _verdict(trace: SimTrace, ratio: float, capped: bool) -> Verdict:
    if trace.saturation_count:
        return Verdict.OVERFLOW
    if capped:
        return Verdict.DIVERGED
    if trace.tail_error() <= ratio * trace.initial_error:
        return Verdict.CONVERGED
    return Verdict.DIVERGED


def settling_time(trace: SimTrace, threshold: float, start: int = 0) -> Optional[float]:
    """Time after step ``start`` until the max tracking error stays below
    ``threshold`` for the rest of the run; None if it never settles"""
    worst = np.max(trace.errors[start:], axis=1)
    above = np.flatnonzero(worst > threshold)
    if above.size == 0:
        return 0.0
    if above[-1] == len(worst) - 1:
        return None
    return float(trace.t[start + above[-1] + 1] - trace.t[start])
