"""Follower-state codec with zooming parameter theta."""

import copy
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..quantizers import FollowerQuantizer, FollowerQuantizerSpec
from .codec import Codec

logger = logging.getLogger('FollowerCodec')


@dataclass
class FollowerCodecState:
    """Shared follower codec state: one estimate per transmitting agent.

    ``z_hat[j]`` is the estimate of agent j's reference observer held by
    agent j itself and by all of its neighbors.
    """
    s_bar: np.ndarray
    z_hat: np.ndarray          # (N, n_v)
    theta: float
    gamma1: float
    gamma2: float
    spec: FollowerQuantizerSpec
    quantized: bool = True

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not 0 < self.gamma1 < 1 < self.gamma2:
            raise ValueError(f"need 0 < gamma1 < 1 < gamma2, got {self.gamma1}, {self.gamma2}")
        self.z_hat = np.array(self.z_hat, dtype=float, ndmin=2)
        self._quantizer = FollowerQuantizer(self.spec)

    @property
    def quantizer(self) -> FollowerQuantizer:
        return self._quantizer

    def copy(self) -> "FollowerCodecState":
        return copy.deepcopy(self)


@dataclass
class FollowerStep:
    """Outcome of one follower transmission"""
    z_hat: np.ndarray
    argument: np.ndarray                 # (z_bar - S_bar z_hat) / theta
    codewords: Optional[np.ndarray]      # None when jammed
    values: np.ndarray                   # Q(argument), zero when jammed
    saturated: bool = False


def _reconstruct(state: FollowerCodecState, j: int, codewords: Optional[np.ndarray],
                 jammed: bool, exact: Optional[np.ndarray] = None) -> np.ndarray:
    prediction = state.s_bar @ state.z_hat[j]
    if jammed:
        z_hat = prediction
    elif not state.quantized:
        z_hat = np.array(exact, dtype=float)
    else:
        z_hat = prediction + state.theta * state.quantizer.decode(codewords)
    state.z_hat[j] = z_hat
    return z_hat


def follower_codec_step(state: FollowerCodecState, j: int, z_bar_j: np.ndarray,
                        jammed: bool) -> FollowerStep:
    """Encode agent j's reference state at step k and update the estimate.

    ``state.theta`` must hold theta_{k-1}. The argument is computed even on
    jammed steps so the switched error dynamics can be audited.
    """
    z_bar_j = np.asarray(z_bar_j, dtype=float)
    argument = (z_bar_j - state.s_bar @ state.z_hat[j]) / state.theta
    if jammed:
        z_hat = _reconstruct(state, j, None, True)
        return FollowerStep(z_hat=z_hat.copy(), argument=argument, codewords=None,
                            values=np.zeros_like(argument))
    if not state.quantized:
        z_hat = _reconstruct(state, j, None, False, exact=z_bar_j)
        return FollowerStep(z_hat=z_hat.copy(), argument=argument,
                            codewords=np.zeros(argument.shape, dtype=np.int64), values=argument.copy())
    out = state.quantizer.quantize(argument)
    z_hat = _reconstruct(state, j, out.codewords, False)
    return FollowerStep(z_hat=z_hat.copy(), argument=argument, codewords=out.codewords,
                        values=out.values, saturated=out.saturated)


def theta_step(state: FollowerCodecState, jammed: bool) -> float:
    """Zoom out by gamma2 on a jammed step, zoom in by gamma1 otherwise"""
    state.theta *= state.gamma2 if jammed else state.gamma1
    return state.theta


class FollowerEncoder(Codec):
    """Transmitting end of agent j's link"""

    def __init__(self, state: FollowerCodecState, agent: int):
        self._state = state
        self.agent = agent

    @property
    def name(self) -> str:
        return f"follower-encoder[{self.agent}]"

    @property
    def state(self) -> FollowerCodecState:
        return self._state

    def encode(self, z_bar: np.ndarray, jammed: bool) -> FollowerStep:
        return follower_codec_step(self._state, self.agent, z_bar, jammed)

    def advance(self, jammed: bool) -> float:
        return theta_step(self._state, jammed)


class FollowerDecoder(Codec):
    """Receiving replica of agent j's link held by a neighbor"""

    def __init__(self, state: FollowerCodecState, agent: int):
        self._state = state
        self.agent = agent

    @property
    def name(self) -> str:
        return f"follower-decoder[{self.agent}]"

    @property
    def state(self) -> FollowerCodecState:
        return self._state

    def decode(self, codewords: Optional[np.ndarray], jammed: bool) -> np.ndarray:
        return _reconstruct(self._state, self.agent, codewords, jammed).copy()

    def advance(self, jammed: bool) -> float:
        return theta_step(self._state, jammed)
