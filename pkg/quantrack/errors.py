"""Exception hierarchy for quantrack."""

from typing import Optional


class QuantrackError(Exception):
    """Base class for all quantrack failures"""


class DimensionError(QuantrackError, ValueError):
    """Matrix or vector shapes do not fit together"""


class JordanDecompositionError(QuantrackError, ValueError):
    """The real Jordan form could not be computed reliably"""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(f"{message} (cond={condition:.3e})")
        self.condition = condition


class RegulatorInfeasibleError(QuantrackError, ValueError):
    """The regulator equations F S = A F + B V, C F = I have no solution"""

    def __init__(self, message: str, residual: Optional[float] = None):
        if residual is not None:
            message = f"{message} (residual={residual:.3e})"
        super().__init__(message)
        self.residual = residual


class QuantizerOverflowError(QuantrackError, ValueError):
    """A leader quantizer argument left [-1, 1]"""


class LeaderOverflowError(QuantrackError, RuntimeError):
    """The leader codec lost its error bound |e_v| <= omega"""

    def __init__(self, step: int, component: int, ratio: float):
        super().__init__(
            f"leader codec overflow at step {step}, component {component}: "
            f"|argument| = {ratio:.6g} > 1"
        )
        self.step = step
        self.component = component
        self.ratio = ratio


class DosSignalError(QuantrackError, ValueError):
    """Invalid DoS interval list or query"""


class TopologyError(QuantrackError, ValueError):
    """Graph is not undirected, connected and pinned"""


class AnalysisError(QuantrackError, RuntimeError):
    """A design constant could not be certified"""


class ConfigError(QuantrackError, ValueError):
    """Scenario configuration is invalid; carries the dotted field path"""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
