"""Distributed reference observers driven by the decoded estimates."""

import numpy as np

from ..topology import FollowerGraph


def observer_step(z_bar_i: np.ndarray, z_hat_i: np.ndarray, z_hat_neighbors: np.ndarray,
                  weights: np.ndarray, v_hat: np.ndarray, a_i0: float,
                  s_bar: np.ndarray, k_bar: np.ndarray, jammed: bool) -> np.ndarray:
    """Advance follower i's observer one step.

    Args:
        z_bar_i: Observer state at step k
        z_hat_i: Agent i's own transmitted estimate
        z_hat_neighbors: Estimates of the neighbors, one row each
        weights: Edge weights a_ij matching the rows of z_hat_neighbors
        v_hat: Decoded leader estimate, used only when a_i0 > 0
        a_i0: Pinning weight
        s_bar, k_bar: Transformed leader matrix and coupling gain
        jammed: Whether step k's transmissions failed

    Returns:
        Observer state at step k + 1
    """
    propagated = s_bar @ z_bar_i
    if jammed:
        return propagated
    coupling = np.zeros_like(z_bar_i)
    for a_ij, z_hat_j in zip(weights, z_hat_neighbors):
        coupling += a_ij * (z_hat_j - z_hat_i)
    if a_i0 > 0:
        coupling += a_i0 * (v_hat - z_hat_i)
    return propagated + k_bar @ coupling


def network_observer_step(z_bar: np.ndarray, z_hat: np.ndarray, v_hat: np.ndarray,
                          graph: FollowerGraph, s_bar: np.ndarray, k_bar: np.ndarray,
                          jammed: bool) -> np.ndarray:
    """Advance every follower's observer; rows of z_bar and z_hat are agents"""
    nxt = np.empty_like(z_bar)
    for i in range(graph.size):
        neighbors = np.flatnonzero(graph.adjacency[i] > 0)
        nxt[i] = observer_step(
            z_bar[i], z_hat[i], z_hat[neighbors], graph.adjacency[i, neighbors],
            v_hat, graph.pinning[i], s_bar, k_bar, jammed,
        )
    return nxt
