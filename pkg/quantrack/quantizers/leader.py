"""Uniform quantizer for the leader's scaled estimation error."""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import DimensionError, QuantizerOverflowError
from .quantizer import Quantizer, QuantizerOutput


def _half_levels(rate: float) -> float:
    return 2.0 ** (rate - 1.0)


def q_leader(pi: float, rate: float) -> Tuple[float, int]:
    """Scalar leader quantizer on [-1, 1].

    Fractional rates use the real-valued 2^(rate-1). When 2^(rate-1) is not
    an integer the point pi = 1 has no regular cell and is sent as the
    sentinel codeword ceil(2^(rate-1)).

    Raises:
        QuantizerOverflowError: If |pi| > 1 or pi is not finite
    """
    values, codewords = _quantize(np.array([pi], dtype=float), np.array([rate], dtype=float))
    return float(values[0]), int(codewords[0])


def _quantize(pi: np.ndarray, rates: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if not np.all(np.isfinite(pi)) or np.any(np.abs(pi) > 1.0):
        bad = int(np.argmax(~np.isfinite(pi) | (np.abs(pi) > 1.0)))
        raise QuantizerOverflowError(
            f"leader quantizer argument {pi[bad]!r} outside [-1, 1] (component {bad})")
    codewords = np.zeros(pi.shape, dtype=np.int64)
    for l, (p, rate) in enumerate(zip(pi, rates)):
        if rate <= 0:
            continue
        s = _half_levels(rate)
        if p < 1.0:
            codewords[l] = math.floor(s * p)
        else:
            codewords[l] = int(s) - 1 if float(s).is_integer() else math.ceil(s)
    return _decode(codewords, rates), codewords


def _decode(codewords: np.ndarray, rates: np.ndarray) -> np.ndarray:
    values = np.zeros(codewords.shape, dtype=float)
    for l, (c, rate) in enumerate(zip(codewords, rates)):
        if rate <= 0:
            continue
        s = _half_levels(rate)
        if not float(s).is_integer() and c == math.ceil(s):
            values[l] = 1.0 - 0.5 / s
        else:
            values[l] = (int(c) + 0.5) / s
    return values


@dataclass(frozen=True)
class LeaderQuantizerSpec:
    """Bits per Jordan block and the per-coordinate rates derived from them"""
    bits_per_block: Tuple[float, ...]
    rates: Tuple[float, ...]

    @classmethod
    def from_blocks(cls, blocks: Sequence, bits: Sequence[float]) -> "LeaderQuantizerSpec":
        """Assign each coordinate the rate of its Jordan block.

        A single rate is broadcast to every block.
        """
        bits = tuple(float(b) for b in bits)
        if len(bits) == 1 and len(blocks) > 1:
            bits = bits * len(blocks)
        if len(bits) != len(blocks):
            raise DimensionError(f"{len(bits)} rates given for {len(blocks)} Jordan blocks")
        if any(b < 0 for b in bits):
            raise ValueError("rates must be nonnegative")
        rates = []
        for block, r in zip(blocks, bits):
            rates.extend([r] * block.dim)
        return cls(bits_per_block=bits, rates=tuple(rates))

    @property
    def H(self) -> np.ndarray:
        """diag(2^-R) per coordinate"""
        return np.diag(2.0 ** -np.array(self.rates))


class LeaderQuantizer(Quantizer):
    """Vector form Q_v(.) of the leader quantizer"""

    def __init__(self, spec: LeaderQuantizerSpec):
        self.spec = spec
        self._rates = np.array(spec.rates, dtype=float)

    @property
    def name(self) -> str:
        return f"leader(R={list(self.spec.bits_per_block)})"

    def quantize(self, x: np.ndarray) -> QuantizerOutput:
        x = np.asarray(x, dtype=float)
        if x.shape != self._rates.shape:
            raise DimensionError(f"argument shape {x.shape} does not match {self._rates.shape}")
        values, codewords = _quantize(x, self._rates)
        return QuantizerOutput(values=values, codewords=codewords)

    def decode(self, codewords: np.ndarray) -> np.ndarray:
        return _decode(np.asarray(codewords, dtype=np.int64), self._rates)


def q_vec_leader(pi, rates) -> QuantizerOutput:
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    spec = LeaderQuantizerSpec(bits_per_block=tuple(rates), rates=tuple(rates))
    return LeaderQuantizer(spec).quantize(np.atleast_1d(np.asarray(pi, dtype=float)))
