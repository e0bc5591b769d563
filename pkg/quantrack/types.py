"""Type definitions for the quantrack package."""

from enum import Enum


class BlockKind(Enum):
    """Kinds of real Jordan blocks"""
    REAL = "real"            # real eigenvalue chain
    COMPLEX = "complex"      # complex-conjugate pair chain


class Verdict(Enum):
    """Outcome of a closed-loop run"""
    CONVERGED = "converged"
    DIVERGED = "diverged"
    OVERFLOW = "overflow"

    @property
    def exit_code(self) -> int:
        return {"converged": 0, "diverged": 2, "overflow": 3}[self.value]


class StepCase(Enum):
    """Switching case of the scaled error dynamics between steps k and k+1"""
    I = "success->success"
    II = "jam->success"
    III = "success->jam"
    IV = "jam->jam"

    @classmethod
    def of(cls, jam_now: bool, jam_next: bool) -> "StepCase":
        if jam_now:
            return cls.IV if jam_next else cls.II
        return cls.III if jam_next else cls.I
