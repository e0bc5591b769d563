"""Follower communication graph and the stacked closed-loop gain matrices."""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, TopologyError
from .lin_core import as_matrix, spectral_radius

logger = logging.getLogger('topology')


@dataclass
class FollowerGraph:
    """Undirected weighted follower graph with leader pinning weights a_i0"""
    adjacency: np.ndarray
    pinning: np.ndarray

    def __post_init__(self):
        """Validate the graph"""
        self.adjacency = np.array(self.adjacency, dtype=float, ndmin=2)
        self.pinning = np.atleast_1d(np.array(self.pinning, dtype=float))
        a = self.adjacency
        n = a.shape[0]
        if a.ndim != 2 or a.shape != (n, n):
            raise TopologyError(f"adjacency must be square, got {a.shape}")
        if self.pinning.shape != (n,):
            raise TopologyError(f"pinning must have {n} entries, got {self.pinning.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(self.pinning < 0):
            raise TopologyError("weights must be finite and nonnegative")
        if np.any(np.diag(a) != 0):
            raise TopologyError("adjacency diagonal must be zero")
        if not np.allclose(a, a.T, rtol=0, atol=1e-12):
            raise TopologyError("adjacency must be symmetric (undirected graph)")
        n_components, _ = connected_components(a > 0, directed=False)
        if n_components != 1:
            raise TopologyError(f"graph is disconnected ({n_components} components)")
        if not np.any(self.pinning > 0):
            raise TopologyError("no follower receives the leader (all a_i0 are zero)")

    @property
    def size(self) -> int:
        return self.adjacency.shape[0]

    @classmethod
    def path(cls, n: int, weight: float = 1.0, pinning: Sequence[float] = None) -> "FollowerGraph":
        a = np.zeros((n, n))
        for i in range(n - 1):
            a[i, i + 1] = a[i + 1, i] = weight
        return cls(a, pinning if pinning is not None else [1.0] + [0.0] * (n - 1))

    @classmethod
    def ring(cls, n: int, weight: float = 1.0, pinning: Sequence[float] = None) -> "FollowerGraph":
        graph = cls.path(n, weight, pinning).adjacency
        if n > 2:
            graph[0, n - 1] = graph[n - 1, 0] = weight
        return cls(graph, pinning if pinning is not None else [1.0] + [0.0] * (n - 1))


def laplacian(graph: FollowerGraph) -> Tuple[np.ndarray, np.ndarray]:
    """Laplacian L_G and pinning matrix D = diag(a_10, ..., a_N0)"""
    a = graph.adjacency
    L = np.diag(a.sum(axis=1)) - a
    return L, np.diag(graph.pinning)


@dataclass
class StackedGains:
    """Stacked matrices of the networked error dynamics.

    G = S_N - (L + D) (x) Kbar, Z = S_N + (L + D) (x) Kbar,
    P = (L + D) (x) Kbar, W = D (x) Kbar, S_N = I_N (x) S_bar.
    ``G_bar`` is G in the eigenbasis U of L + D; its diagonal blocks are
    S_bar - lambda_i Kbar.
    """
    G: np.ndarray
    Z: np.ndarray
    P: np.ndarray
    W: np.ndarray
    S_N: np.ndarray
    lambdas: np.ndarray
    U: np.ndarray
    G_bar: np.ndarray
    mode_radii: List[float]
    rho_g: float

    @property
    def n_agents(self) -> int:
        return self.U.shape[0]

    @property
    def n_v(self) -> int:
        return self.S_N.shape[0] // self.n_agents

    @property
    def schur_stable(self) -> bool:
        return all(r < 1 for r in self.mode_radii)


def build_gain_matrices(graph: FollowerGraph, S_bar, K_bar) -> StackedGains:
    """Build G, Z, P, W, S_N and the block-triangular G_bar.

    Non-Schur modes S_bar - lambda_i Kbar are reported as warnings; the
    gains are still returned so demonstration runs can proceed.

    Raises:
        DimensionError: If Kbar does not match S_bar
    """
    S_bar = as_matrix(S_bar, "S_bar")
    n_v = S_bar.shape[0]
    if S_bar.shape != (n_v, n_v):
        raise DimensionError(f"S_bar must be square, got {S_bar.shape}")
    K_bar = as_matrix(K_bar, "K_bar")
    if K_bar.shape != (n_v, n_v):
        raise DimensionError(f"K_bar shape {K_bar.shape} does not match S_bar {S_bar.shape}")

    L, D = laplacian(graph)
    H = L + D
    n = graph.size
    lambdas, U = linalg.eigh(H)

    S_N = np.kron(np.eye(n), S_bar)
    P = np.kron(H, K_bar)
    W = np.kron(D, K_bar)
    G = S_N - P
    Z = S_N + P
    UI = np.kron(U, np.eye(n_v))
    G_bar = UI.T @ G @ UI

    mode_radii = [spectral_radius(S_bar - lam * K_bar) for lam in lambdas]
    for lam, r in zip(lambdas, mode_radii):
        if r >= 1:
            logger.warning(f"Observer mode for lambda={lam:.5f} is not Schur stable (rho={r:.5f})")

    return StackedGains(
        G=G, Z=Z, P=P, W=W, S_N=S_N,
        lambdas=lambdas, U=U, G_bar=G_bar,
        mode_radii=mode_radii, rho_g=spectral_radius(G),
    )
