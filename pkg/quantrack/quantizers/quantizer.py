"""Base class and shared helpers for quantizers."""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError


@dataclass
class QuantizerOutput:
    """Result of quantizing a vector"""
    values: np.ndarray
    codewords: np.ndarray     # int64 symbols sent over the channel
    saturated: bool = False   # OR over components


class Quantizer(ABC):
    """Abstract base class for quantizers.

    A quantizer maps real arguments to a finite alphabet of integer
    codewords and back. ``decode(quantize(x).codewords)`` must reproduce
    ``quantize(x).values`` bit for bit, since the decoder only ever sees
    the codewords.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Short identifier used in logs and reports"""
        pass

    @abstractmethod
    def quantize(self, x: np.ndarray) -> QuantizerOutput:
        """Quantize a vector argument.

        Args:
            x: Argument vector

        Returns:
            Values, codewords and the saturation flag
        """
        pass

    @abstractmethod
    def decode(self, codewords: np.ndarray) -> np.ndarray:
        """Map received codewords back to quantized values"""
        pass


def _pair(a, b) -> tuple:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"element-wise operands differ in shape: {a.shape} vs {b.shape}")
    return a, b


def ediv(a, b) -> np.ndarray:
    """Element-wise division of vectors"""
    a, b = _pair(a, b)
    return a / b


def emul(a, b) -> np.ndarray:
    """Element-wise multiplication of vectors"""
    a, b = _pair(a, b)
    return a * b


def encode_codewords(codewords) -> bytes:
    """Serialize codewords as little-endian int64"""
    return np.asarray(codewords, dtype=np.int64).astype("<i8").tobytes()


def decode_codewords(data: bytes) -> np.ndarray:
    return np.frombuffer(data, dtype="<i8").astype(np.int64)
