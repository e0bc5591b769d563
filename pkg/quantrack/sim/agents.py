"""Heterogeneous follower plants and the leader exosystem."""

from dataclasses import dataclass

import numpy as np

from ..lin_core import JordanDecomposition, as_matrix, solve_sylvester_regulator, spectral_radius


@dataclass
class AgentModel:
    """Follower plant x+ = A x + B u, y = C x with its regulator solution"""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray
    F: np.ndarray
    V: np.ndarray
    x: np.ndarray

    @classmethod
    def build(cls, A, B, C, K, x0, S) -> "AgentModel":
        """Solve the regulator equations against S and assemble the agent.

        Raises:
            DimensionError: If shapes do not fit
            RegulatorInfeasibleError: If F S = A F + B V, C F = I has no solution
        """
        A = as_matrix(A, "A")
        B = as_matrix(B, "B")
        C = as_matrix(C, "C")
        K = as_matrix(K, "K", (B.shape[1], A.shape[0]))
        F, V = solve_sylvester_regulator(A, B, C, S)
        return cls(A=A, B=B, C=C, K=K, F=F, V=V, x=np.array(x0, dtype=float))

    @property
    def closed_loop_radius(self) -> float:
        return spectral_radius(self.A + self.B @ self.K)

    def output(self) -> np.ndarray:
        return self.C @ self.x

    def advance(self, u: np.ndarray) -> np.ndarray:
        self.x = self.A @ self.x + self.B @ u
        return self.x


def control_input(agent: AgentModel, z: np.ndarray) -> np.ndarray:
    """u = K x + (V - K F) z"""
    return agent.K @ agent.x + (agent.V - agent.K @ agent.F) @ z


@dataclass
class LeaderModel:
    """Leader exosystem v+ = S v"""
    S: np.ndarray
    v: np.ndarray
    dec: JordanDecomposition

    def advance(self) -> np.ndarray:
        self.v = self.S @ self.v
        return self.v

    def transformed(self, k: int) -> np.ndarray:
        """v_bar(k) = E(k) T v(k)"""
        return self.dec.to_bar(self.v, k)
