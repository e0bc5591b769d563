"""Base class for ACK-synchronized encoder/decoder state machines."""

from abc import ABC, abstractmethod
from typing import Any


class Codec(ABC):
    """Abstract base class for one end of a codec link.

    The encoder and every decoder replica hold their own copy of the codec
    state. Both ends apply the same reconstruction to the same codewords
    and the same global jam flag, so the copies stay bitwise identical
    without any extra traffic beyond the acknowledgments.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Identifier of the link end, used in logs"""
        pass

    @property
    @abstractmethod
    def state(self) -> Any:
        """The codec state held at this end"""
        pass

    @abstractmethod
    def advance(self, jammed: bool) -> Any:
        """Update the scaling variables once per step, after all agents
        have been processed.

        Args:
            jammed: Whether the step's transmissions failed

        Returns:
            The new scaling value
        """
        pass
