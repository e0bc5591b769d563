"""Leader-state codec with per-coordinate scaling vector omega."""

import copy
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import LeaderOverflowError
from ..quantizers import LeaderQuantizer, LeaderQuantizerSpec, ediv, emul
from .codec import Codec

logger = logging.getLogger('LeaderCodec')

EPS = np.finfo(float).eps


@dataclass
class LeaderCodecState:
    """Leader codec state shared by the leader and its pinned followers.

    The invariant |v_hat - v_bar| <= omega holds elementwise at every step.
    """
    v_hat: np.ndarray
    omega: np.ndarray
    s_bar: np.ndarray
    s_tilde: np.ndarray
    spec: LeaderQuantizerSpec
    quantized: bool = True

    def __post_init__(self):
        self.v_hat = np.array(self.v_hat, dtype=float)
        self.omega = np.array(self.omega, dtype=float)
        if np.any(self.omega <= 0):
            raise ValueError("omega must be elementwise positive")
        self._quantizer = LeaderQuantizer(self.spec)
        self._H = self.spec.H

    @property
    def H(self) -> np.ndarray:
        return self._H

    @property
    def quantizer(self) -> LeaderQuantizer:
        return self._quantizer

    def copy(self) -> "LeaderCodecState":
        return copy.deepcopy(self)


@dataclass
class LeaderStep:
    v_hat: np.ndarray
    argument: np.ndarray                 # quantizer input, in [-1, 1]
    codewords: Optional[np.ndarray]      # None when jammed
    values: np.ndarray


def _reconstruct(state: LeaderCodecState, codewords: Optional[np.ndarray], jammed: bool,
                 exact: Optional[np.ndarray] = None) -> np.ndarray:
    prediction = state.s_bar @ state.v_hat
    if jammed:
        v_hat = prediction
    elif not state.quantized:
        v_hat = np.array(exact, dtype=float)
    else:
        scale = state.s_tilde @ state.omega
        v_hat = prediction - emul(scale, state.quantizer.decode(codewords))
    state.v_hat = v_hat
    return v_hat


def _argument(state: LeaderCodecState, v_bar: np.ndarray, step: int, check: bool) -> np.ndarray:
    numerator = state.s_bar @ state.v_hat - v_bar
    denominator = state.s_tilde @ state.omega
    if check:
        slack = 64 * EPS * (np.abs(state.s_bar) @ np.abs(state.v_hat) + np.abs(v_bar))
        excess = np.abs(numerator) - denominator - slack
        if np.any(excess > 0):
            l = int(np.argmax(excess))
            ratio = abs(numerator[l]) / denominator[l] if denominator[l] > 0 else float("inf")
            raise LeaderOverflowError(step, l, ratio)
    safe = np.where(denominator > 0, denominator, 1.0)
    return np.where(denominator > 0, np.clip(ediv(numerator, safe), -1.0, 1.0), 0.0)


def leader_codec_step(state: LeaderCodecState, v_bar: np.ndarray, jammed: bool,
                      step: int = 0) -> LeaderStep:
    """Encode the transformed leader state at step k.

    ``state.omega`` must hold omega(k-1). On success the estimate moves by
    -(S_tilde omega) o Q_v((S_bar v_hat - v_bar) / (S_tilde omega)).

    Raises:
        LeaderOverflowError: If the quantizer argument leaves [-1, 1]
    """
    v_bar = np.asarray(v_bar, dtype=float)
    argument = _argument(state, v_bar, step, check=state.quantized)
    if jammed:
        v_hat = _reconstruct(state, None, True)
        return LeaderStep(v_hat=v_hat.copy(), argument=argument, codewords=None,
                          values=np.zeros_like(argument))
    if not state.quantized:
        v_hat = _reconstruct(state, None, False, exact=v_bar)
        return LeaderStep(v_hat=v_hat.copy(), argument=argument,
                          codewords=np.zeros(argument.shape, dtype=np.int64), values=argument.copy())
    out = state.quantizer.quantize(argument)
    v_hat = _reconstruct(state, out.codewords, False)
    return LeaderStep(v_hat=v_hat.copy(), argument=argument, codewords=out.codewords, values=out.values)


def omega_step(state: LeaderCodecState, jammed: bool) -> np.ndarray:
    """omega(k) = S_tilde omega(k-1) when jammed, S_tilde H omega(k-1) otherwise"""
    state.omega = state.s_tilde @ state.omega if jammed else state.s_tilde @ (state.H @ state.omega)
    return state.omega


def reinflate(state: LeaderCodecState, v_bar: np.ndarray, margin: float = 1.05) -> bool:
    """Grow omega so the next quantizer argument fits in [-1, 1].

    Used when the leader state jumps. Both ends apply it at the same
    announced step.

    Returns:
        True if omega changed
    """
    numerator = np.abs(state.s_bar @ state.v_hat - np.asarray(v_bar, dtype=float))
    diag = np.diag(state.s_tilde)
    # zero-eigenvalue components take the raw mismatch
    needed = margin * np.divide(numerator, diag, out=numerator.copy(), where=diag > 0)
    if np.all(needed <= state.omega):
        return False
    state.omega = np.maximum(state.omega, needed)
    logger.warning(f"Leader scaling re-inflated to {np.array2string(state.omega, precision=4)}")
    return True


class LeaderEncoder(Codec):
    """Leader end of the leader-to-pinned-follower links"""

    def __init__(self, state: LeaderCodecState):
        self._state = state

    @property
    def name(self) -> str:
        return "leader-encoder"

    @property
    def state(self) -> LeaderCodecState:
        return self._state

    def encode(self, v_bar: np.ndarray, jammed: bool, step: int = 0) -> LeaderStep:
        return leader_codec_step(self._state, v_bar, jammed, step)

    def advance(self, jammed: bool) -> np.ndarray:
        return omega_step(self._state, jammed)


class LeaderDecoder(Codec):
    """Replica held by a pinned follower"""

    def __init__(self, state: LeaderCodecState):
        self._state = state

    @property
    def name(self) -> str:
        return "leader-decoder"

    @property
    def state(self) -> LeaderCodecState:
        return self._state

    def decode(self, codewords: Optional[np.ndarray], jammed: bool) -> np.ndarray:
        return _reconstruct(self._state, codewords, jammed).copy()

    def advance(self, jammed: bool) -> np.ndarray:
        return omega_step(self._state, jammed)
