"""DoS attack signals: representation, measurement and generation."""

import math
import bisect
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import DosSignalError

logger = logging.getLogger('DosSignal')


@dataclass(frozen=True)
class DosBudget:
    """Frequency and duration budget of a DoS signal.

    n(tau, t) <= eta + (t - tau) / tau_D and
    |Xi(tau, t)| <= kappa + (t - tau) / T.
    """
    eta: float
    tau_D: float
    kappa: float
    T: float

    def __post_init__(self):
        if not self.tau_D > 0:
            raise DosSignalError(f"tau_D must be positive, got {self.tau_D}")
        if not self.T > 1:
            raise DosSignalError(f"T must exceed 1, got {self.T}")
        if self.eta < 0 or self.kappa < 0:
            raise DosSignalError("eta and kappa must be nonnegative")


class AveragedBudget(NamedTuple):
    inv_T: float
    delta_over_tau_D: float
    total: float


class DosSignal:
    """Ordered, disjoint attack intervals [h_q, h_q + tau_q) on [0, horizon].

    A zero-length interval is a single pulse at h_q. Overlapping intervals
    are merged at construction.
    """

    def __init__(self, intervals: Iterable[Tuple[float, float]], delta: float, horizon: float):
        if not delta > 0:
            raise DosSignalError(f"sampling period must be positive, got {delta}")
        if not horizon >= delta:
            raise DosSignalError(f"horizon {horizon} shorter than one sampling period")
        self.delta = float(delta)
        self.horizon = float(horizon)
        self.eps = 1e-6 * self.delta
        self.intervals: Tuple[Tuple[float, float], ...] = self._normalize(intervals)
        if self.intervals and self.intervals[0][0] < self.delta - self.eps:
            raise DosSignalError(
                f"first attack at {self.intervals[0][0]} precedes the first sampling period {self.delta}")
        self._starts = [h for h, _ in self.intervals]

    @staticmethod
    def _normalize(intervals: Iterable[Tuple[float, float]]) -> Tuple[Tuple[float, float], ...]:
        cleaned = []
        for q, item in enumerate(intervals):
            try:
                h, tau = float(item[0]), float(item[1])
            except (TypeError, ValueError, IndexError):
                raise DosSignalError(f"interval {q}: expected (h, tau), got {item!r}")
            if not (math.isfinite(h) and math.isfinite(tau)) or h < 0 or tau < 0:
                raise DosSignalError(f"interval {q}: invalid ({h}, {tau})")
            cleaned.append((h, tau))
        cleaned.sort()

        merged: List[List[float]] = []
        for h, tau in cleaned:
            if merged:
                last = merged[-1]
                end = last[0] + last[1]
                if h < end or (h == end and tau > 0 and last[1] > 0):
                    last[1] = max(end, h + tau) - last[0]
                    continue
            merged.append([h, tau])
        return tuple((h, tau) for h, tau in merged)

    @classmethod
    def empty(cls, delta: float, horizon: float) -> "DosSignal":
        return cls([], delta, horizon)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DosSignal) and self.intervals == other.intervals
                and self.delta == other.delta and self.horizon == other.horizon)

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.delta))

    def is_jammed(self, k: int) -> bool:
        """Whether the transmission at instant k * delta fails.

        Raises:
            DosSignalError: If the instant lies outside [0, horizon]
        """
        t = k * self.delta
        if k < 0 or t > self.horizon + self.eps:
            raise DosSignalError(f"step {k} (t={t:g}) outside horizon {self.horizon:g}")
        q = bisect.bisect_right(self._starts, t + self.eps) - 1
        if q < 0:
            return False
        h, tau = self.intervals[q]
        if tau == 0:
            return abs(t - h) <= self.eps
        return t < h + tau - self.eps

    def jam_sequence(self, steps: Optional[int] = None) -> np.ndarray:
        """Jam flags for k = 0..steps"""
        steps = self.steps if steps is None else steps
        return np.array([self.is_jammed(k) for k in range(steps + 1)], dtype=bool)

    def _check_range(self, tau: float, t: float):
        if tau < -self.eps or t < tau or t > self.horizon + self.eps:
            raise DosSignalError(f"invalid window [{tau}, {t}] for horizon {self.horizon}")

    def count_transitions(self, tau: float, t: float) -> int:
        """Number of attack onsets h_q in [tau, t]"""
        self._check_range(tau, t)
        lo = bisect.bisect_left(self._starts, tau - self.eps)
        hi = bisect.bisect_right(self._starts, t + self.eps)
        return max(hi - lo, 0)

    def duration(self, tau: float, t: float) -> float:
        """Measure of the jammed set within [tau, t]"""
        self._check_range(tau, t)
        total = 0.0
        for h, length in self.intervals:
            if h >= t:
                break
            total += max(0.0, min(h + length, t) - max(h, tau))
        return total

    def averaged_budget(self) -> AveragedBudget:
        n = self.count_transitions(0.0, self.horizon)
        if n == 0:
            return AveragedBudget(0.0, 0.0, 0.0)
        inv_T = self.duration(0.0, self.horizon) / self.horizon
        delta_over_tau_D = self.delta * n / self.horizon
        return AveragedBudget(inv_T, delta_over_tau_D, inv_T + delta_over_tau_D)

    def minimal_budget(self, inv_T: Optional[float] = None,
                       inv_tau_D: Optional[float] = None) -> DosBudget:
        """Smallest (eta, kappa) meeting both budget inequalities on every
        window with endpoints on the sampling grid.

        The rates default to the averaged ones over the horizon.
        """
        if inv_T is None:
            inv_T = self.duration(0.0, self.horizon) / self.horizon
        if inv_tau_D is None:
            inv_tau_D = self.count_transitions(0.0, self.horizon) / self.horizon
        if inv_T >= 1:
            raise DosSignalError(f"duration rate 1/T = {inv_T} leaves no attack-free time")
        if inv_tau_D < 0 or inv_T < 0:
            raise DosSignalError("rates must be nonnegative")

        grid = np.arange(self.steps + 1) * self.delta
        grid[-1] = min(grid[-1], self.horizon)
        covered = np.zeros_like(grid)
        for h, length in self.intervals:
            covered += np.clip(grid - h, 0.0, length)
        starts = np.array(self._starts)
        n_upto = np.searchsorted(starts, grid + self.eps, side="right")
        n_before = np.searchsorted(starts, grid - self.eps, side="left")

        f = covered - grid * inv_T
        kappa = float(np.max(f - np.minimum.accumulate(f)))
        g_end = n_upto - grid * inv_tau_D
        g_start = n_before - grid * inv_tau_D
        eta = float(max(np.max(g_end - np.minimum.accumulate(g_start)), 0.0))

        return DosBudget(
            eta=eta,
            tau_D=math.inf if inv_tau_D == 0 else 1.0 / inv_tau_D,
            kappa=max(kappa, 0.0),
            T=math.inf if inv_T == 0 else 1.0 / inv_T,
        )

    def to_text(self) -> str:
        lines = [f"# DoS intervals: h tau (seconds), delta={self.delta:g}, horizon={self.horizon:g}"]
        lines.extend(f"{h:.9f} {tau:.9f}" for h, tau in self.intervals)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, delta: float, horizon: float) -> "DosSignal":
        intervals = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DosSignalError(f"line {lineno}: expected 'h tau', got {line!r}")
            try:
                intervals.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise DosSignalError(f"line {lineno}: not a number pair: {line!r}")
        return cls(intervals, delta, horizon)

    def save(self, path: str):
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str, delta: float, horizon: float) -> "DosSignal":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise DosSignalError(f"cannot read DoS signal {path}: {str(e)}")
        return cls.from_text(text, delta, horizon)


def generate_random(target_sum: float, delta: float, horizon: float, seed: int,
                    duty_share: float = 0.6) -> DosSignal:
    """Random sustained attack with variable period and duty cycle.

    ``duty_share`` of the target goes to the jammed fraction 1/T, the rest
    to the onset rate delta/tau_D. On- and off-durations are drawn from
    U[0.5, 1.5] and rescaled to the budgets, so the averaged sum matches the
    target up to rounding of the onset count.

    Raises:
        DosSignalError: If the target is outside [0, 1) or cannot be met
    """
    if not 0 <= target_sum < 1:
        raise DosSignalError(f"target sum must lie in [0, 1), got {target_sum}")
    if not 0 <= duty_share <= 1:
        raise DosSignalError(f"duty share must lie in [0, 1], got {duty_share}")
    if target_sum == 0:
        return DosSignal.empty(delta, horizon)

    n = max(1, int(round((1 - duty_share) * target_sum * horizon / delta)))
    duty = max(target_sum - delta * n / horizon, 0.0)
    rng = np.random.default_rng(seed)
    on = rng.uniform(0.5, 1.5, size=n)
    on = on * (duty * horizon / on.sum())
    off_budget = horizon - delta - on.sum()
    if off_budget <= 0:
        raise DosSignalError(f"target {target_sum} leaves no attack-free time")
    off = rng.uniform(0.5, 1.5, size=n + 1)
    off = off * (off_budget / off.sum())

    intervals = []
    t = delta + off[0]
    for q in range(n):
        intervals.append((round(t, 9), round(on[q], 9)))
        t += on[q] + off[q + 1]
    logger.info(f"Generated {n} attack intervals for target {target_sum:.3f} (seed {seed})")
    return DosSignal(intervals, delta, horizon)
