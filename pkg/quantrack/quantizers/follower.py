"""Mid-tread saturating quantizer used between followers."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .quantizer import Quantizer, QuantizerOutput


@dataclass(frozen=True)
class FollowerQuantizerSpec:
    """Levels parameter R_f and cell half-width sigma.

    The alphabet is {0, +-2 sigma, ..., +-2 R_f sigma}.
    """
    levels: int
    sigma: float

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 1:
            raise ValueError(f"levels must be an integer >= 1, got {self.levels}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def range(self) -> float:
        """Saturation threshold (2 R_f + 1) sigma"""
        return (2 * self.levels + 1) * self.sigma

    @property
    def alphabet_size(self) -> int:
        return 2 * self.levels + 1


def _cells(chi: np.ndarray, spec: FollowerQuantizerSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Signed cell index and saturation mask"""
    chi = np.asarray(chi, dtype=float)
    sign = np.where(chi < 0, -1, 1)
    a = np.abs(chi)
    a = np.where(np.isfinite(a), a, np.inf)
    saturated = a >= spec.range
    a = np.minimum(a, 2 * spec.range)
    psi = np.floor((a / spec.sigma + 1) / 2)
    # cells are [(2 psi - 1) sigma, (2 psi + 1) sigma)
    psi = np.where((2 * psi - 1) * spec.sigma > a, psi - 1, psi)
    psi = np.where(a >= (2 * psi + 1) * spec.sigma, psi + 1, psi)
    psi = np.clip(psi, 0, spec.levels).astype(np.int64)
    return sign * psi, saturated


def q_follower(chi: float, spec: FollowerQuantizerSpec) -> Tuple[float, bool, int]:
    """Scalar follower quantizer.

    Returns:
        (value, saturated, codeword) with value = 2 * codeword * sigma
    """
    codeword, saturated = _cells(np.array([chi]), spec)
    c = int(codeword[0])
    return 2.0 * c * spec.sigma, bool(saturated[0]), c


class FollowerQuantizer(Quantizer):
    """Vector form Q(.) of the follower quantizer"""

    def __init__(self, spec: FollowerQuantizerSpec):
        self.spec = spec

    @property
    def name(self) -> str:
        return f"follower(R_f={self.spec.levels}, sigma={self.spec.sigma:g})"

    def quantize(self, x: np.ndarray) -> QuantizerOutput:
        codewords, saturated = _cells(x, self.spec)
        return QuantizerOutput(
            values=self.decode(codewords),
            codewords=codewords,
            saturated=bool(np.any(saturated)),
        )

    def decode(self, codewords: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(codewords, dtype=np.int64) * self.spec.sigma


def q_vec_follower(chi, spec: FollowerQuantizerSpec) -> QuantizerOutput:
    return FollowerQuantizer(spec).quantize(np.atleast_1d(np.asarray(chi, dtype=float)))
