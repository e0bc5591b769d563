"""Dense linear algebra for small systems.

Real Jordan form with the time-varying rotation remover E(k), regulator
equation solver and zero-order-hold discretization.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import DimensionError, JordanDecompositionError, RegulatorInfeasibleError
from .types import BlockKind

logger = logging.getLogger('lin_core')

EPS = np.finfo(float).eps


def as_matrix(value, name: str = "matrix", shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Convert to a finite 2-D float array, optionally checking its shape.

    Raises:
        DimensionError: If the value is not 2-D, has the wrong shape or
            holds non-finite entries
    """
    m = np.array(value, dtype=float, ndmin=2)
    if m.ndim != 2:
        raise DimensionError(f"{name}: expected a matrix, got {m.ndim} dimensions")
    if shape is not None and m.shape != tuple(shape):
        raise DimensionError(f"{name}: shape {m.shape} does not match {tuple(shape)}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name}: entries must be finite")
    return m


def _square(value, name: str) -> np.ndarray:
    m = as_matrix(value, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name}: expected a square matrix, got {m.shape}")
    return m


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a square matrix"""
    M = _square(M, "spectral_radius")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def rotation(phi: float) -> np.ndarray:
    """r(phi) = [[cos, sin], [-sin, cos]]"""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class JordanBlock:
    """One real Jordan block of S.

    ``size`` is the chain length; a complex-pair block spans ``2 * size``
    coordinates starting at ``offset``.
    """
    kind: BlockKind
    modulus: float
    angle: float
    size: int
    offset: int
    eigenvalue: float = 0.0   # signed value for real blocks

    @property
    def dim(self) -> int:
        return self.size if self.kind == BlockKind.REAL else 2 * self.size

    @property
    def coords(self) -> slice:
        return slice(self.offset, self.offset + self.dim)


@dataclass
class JordanDecomposition:
    """T, S_bar and S_tilde with T S T^-1 = S_bar up to the rotation remover"""
    T: np.ndarray
    T_inv: np.ndarray
    blocks: List[JordanBlock]
    S_bar: np.ndarray
    S_tilde: np.ndarray      # S_bar with real eigenvalues replaced by their moduli; drives omega
    J: np.ndarray = field(repr=False)   # real Jordan form T S T^-1

    @property
    def n(self) -> int:
        return self.S_bar.shape[0]

    @property
    def has_complex(self) -> bool:
        return any(b.kind == BlockKind.COMPLEX for b in self.blocks)

    @property
    def rho(self) -> float:
        return max((b.modulus for b in self.blocks), default=0.0)

    def e_matrix(self, k: int) -> np.ndarray:
        return e_matrix(self, k)

    def to_bar(self, v: np.ndarray, k: int) -> np.ndarray:
        """v_bar = E(k) T v"""
        w = self.T @ v
        return e_matrix(self, k) @ w if self.has_complex else w

    def from_bar(self, z_bar: np.ndarray, k: int) -> np.ndarray:
        """z = T^-1 E(k)^T z_bar"""
        if self.has_complex:
            z_bar = e_matrix(self, k).T @ z_bar
        return self.T_inv @ z_bar


def _null_basis(M: np.ndarray, tol: float) -> np.ndarray:
    if M.size == 0:
        return np.zeros((0, 0))
    return linalg.null_space(M, rcond=tol / max(np.linalg.norm(M, 2), tol))


def _orth_complement(K: np.ndarray, Q: Optional[np.ndarray], tol: float) -> np.ndarray:
    """Orthonormal basis of the part of span(K) orthogonal to span(Q)"""
    if Q is not None and Q.shape[1]:
        K = K - Q @ (Q.conj().T @ K)
    if K.shape[1] == 0:
        return K
    U, s, _ = np.linalg.svd(K, full_matrices=False)
    return U[:, s > tol]


def _orth(X: np.ndarray, tol: float) -> np.ndarray:
    if X.shape[1] == 0:
        return X
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    return U[:, s > tol]


def _cluster(eigs: np.ndarray, tol: float) -> List[Tuple[complex, int]]:
    """Single-linkage clustering of eigenvalues; returns (mean, multiplicity)"""
    remaining = list(eigs)
    clusters = []
    while remaining:
        group = [remaining.pop(0)]
        grown = True
        while grown:
            grown = False
            for e in list(remaining):
                if min(abs(e - g) for g in group) <= tol:
                    group.append(e)
                    remaining.remove(e)
                    grown = True
        clusters.append((complex(np.mean(group)), len(group)))
    return clusters


def _jordan_chains(N: np.ndarray, mult: int, tol: float) -> List[List[np.ndarray]]:
    """Jordan chains of the nilpotent part N on its generalized eigenspace.

    Each chain is [p_1, ..., p_L] with N p_1 = 0 and N p_i = p_{i-1}.
    """
    n = N.shape[0]
    kernels = [np.zeros((n, 0), dtype=N.dtype)]
    power = np.eye(n, dtype=N.dtype)
    while kernels[-1].shape[1] < mult:
        power = power @ N
        K = _null_basis(power, tol)
        if K.shape[1] <= kernels[-1].shape[1]:
            raise JordanDecompositionError(
                "generalized eigenspace does not reach the algebraic multiplicity",
                float("inf"),
            )
        kernels.append(K)
    depth = len(kernels) - 1

    chains: List[List[np.ndarray]] = []
    for level in range(depth, 0, -1):
        # vectors of this level already produced by longer chains
        existing = [c[level - 1] for c in chains if len(c) >= level]
        Q = _orth(np.column_stack([kernels[level - 1]] + existing) if existing
                  else kernels[level - 1], tol)
        tops = _orth_complement(kernels[level], Q, tol)
        for t in range(tops.shape[1]):
            w = tops[:, t]
            w = w / np.linalg.norm(w)
            lead = int(np.argmax(np.abs(w)))
            w = w * (abs(w[lead]) / w[lead])
            chain = [w]
            for _ in range(level - 1):
                chain.insert(0, N @ chain[0])
            chains.append(chain)
    return chains


def real_jordan_form(S, tol: float = 1e-8) -> JordanDecomposition:
    """Real Jordan form of S with the rotation-remover normalization.

    Real eigenvalue chains give blocks with lambda on the diagonal and ones
    on the superdiagonal. Complex pairs give zeta*I2 diagonal blocks and
    r(-phi) superdiagonal blocks in S_bar, with E(k+1) T S T^-1 E(k)^-1 = S_bar.
    Blocks are ordered by descending modulus, then angle, then descending
    chain length.

    Args:
        S: Square leader matrix
        tol: Relative tolerance for eigenvalue clustering and residual checks

    Returns:
        The decomposition

    Raises:
        DimensionError: If S is not square
        JordanDecompositionError: If S is numerically defective beyond
            tolerance or the transformation is ill-conditioned
    """
    S = _square(S, "S")
    n = S.shape[0]
    scale = max(np.linalg.norm(S, 2), 1.0)
    eigs = np.linalg.eigvals(S)

    raw = []   # (modulus, angle, length, kind, eigenvalue, columns)
    for mu, mult in _cluster(eigs, tol * scale):
        if abs(mu.imag) <= tol * scale:
            lam = mu.real
            N = S - lam * np.eye(n)
            for chain in _jordan_chains(N, mult, tol * scale):
                cols = [np.real(p) for p in chain]
                raw.append((abs(lam), 0.0 if lam >= 0 else np.pi, len(chain),
                            BlockKind.REAL, lam, cols))
        elif mu.imag > 0:
            N = S.astype(complex) - mu * np.eye(n)
            zeta, phi = abs(mu), float(np.arctan2(mu.imag, mu.real))
            for chain in _jordan_chains(N, mult, tol * scale):
                cols = []
                for p in chain:
                    cols.extend([p.real, p.imag])
                raw.append((zeta, phi, len(chain), BlockKind.COMPLEX, 0.0, cols))

    raw.sort(key=lambda b: (-round(b[0], 12), b[1], -b[2]))
    columns: List[np.ndarray] = []
    blocks: List[JordanBlock] = []
    for modulus, angle, length, kind, lam, cols in raw:
        blocks.append(JordanBlock(kind=kind, modulus=float(modulus), angle=float(angle),
                                  size=length, offset=len(columns), eigenvalue=float(lam)))
        columns.extend(cols)
    if len(columns) != n:
        raise JordanDecompositionError(
            f"recovered {len(columns)} of {n} generalized eigenvectors", float("inf"))

    P = np.column_stack(columns)
    condition = float(np.linalg.cond(P))
    if not np.isfinite(condition) or condition > 1e10:
        raise JordanDecompositionError("Jordan basis is ill-conditioned", condition)
    T = np.linalg.inv(P)

    J = np.zeros((n, n))
    S_bar = np.zeros((n, n))
    S_tilde = np.zeros((n, n))
    for b in blocks:
        o = b.offset
        if b.kind == BlockKind.REAL:
            for i in range(b.size):
                J[o + i, o + i] = S_bar[o + i, o + i] = b.eigenvalue
                S_tilde[o + i, o + i] = b.modulus
                if i + 1 < b.size:
                    J[o + i, o + i + 1] = S_bar[o + i, o + i + 1] = 1.0
                    S_tilde[o + i, o + i + 1] = 1.0
        else:
            for i in range(b.size):
                d = slice(o + 2 * i, o + 2 * i + 2)
                J[d, d] = b.modulus * rotation(b.angle)
                S_bar[d, d] = S_tilde[d, d] = b.modulus * np.eye(2)
                if i + 1 < b.size:
                    u = slice(o + 2 * i + 2, o + 2 * i + 4)
                    J[d, u] = np.eye(2)
                    S_bar[d, u] = rotation(-b.angle)
                    S_tilde[d, u] = np.ones((2, 2))

    residual = float(np.linalg.norm(T @ S @ P - J, 2))
    if residual > tol * scale:
        raise JordanDecompositionError(
            f"reconstruction residual {residual:.3e} exceeds tolerance", condition)
    if any(b.modulus <= tol * scale for b in blocks):
        logger.warning("S is singular; zero-eigenvalue blocks carry no rotation")

    return JordanDecomposition(T=T, T_inv=P, blocks=blocks, S_bar=S_bar, S_tilde=S_tilde, J=J)


def e_matrix(dec: JordanDecomposition, k: int) -> np.ndarray:
    """Rotation remover E(k): identity on real blocks, r(phi)^-k on each
    2x2 sub-block of complex-pair blocks"""
    E = np.eye(dec.n)
    if k == 0:
        return E
    for b in dec.blocks:
        if b.kind != BlockKind.COMPLEX:
            continue
        c, s = np.cos(k * b.angle), np.sin(k * b.angle)
        R = np.array([[c, -s], [s, c]])
        for i in range(b.size):
            d = slice(b.offset + 2 * i, b.offset + 2 * i + 2)
            E[d, d] = R
    return E


def solve_sylvester_regulator(A, B, C, S, tol: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """Solve F S = A F + B V and C F = I for (F, V).

    The unknowns are stacked column-major and solved as one linear system.

    Raises:
        DimensionError: If the shapes are inconsistent
        RegulatorInfeasibleError: If the stacked system is rank deficient
            or its least-squares residual exceeds tolerance
    """
    A = _square(A, "A")
    S = _square(S, "S")
    n, q = A.shape[0], S.shape[0]
    B = as_matrix(B, "B")
    if B.shape[0] != n:
        raise DimensionError(f"B: expected {n} rows, got {B.shape[0]}")
    m = B.shape[1]
    C = as_matrix(C, "C", (q, n))

    In, Iq = np.eye(n), np.eye(q)
    M = np.block([
        [np.kron(S.T, In) - np.kron(Iq, A), -np.kron(Iq, B)],
        [np.kron(Iq, C), np.zeros((q * q, m * q))],
    ])
    rhs = np.concatenate([np.zeros(n * q), Iq.reshape(-1, order="F")])
    sol, _, rank, _ = np.linalg.lstsq(M, rhs, rcond=None)
    if rank < M.shape[1]:
        raise RegulatorInfeasibleError(
            f"regulator system is rank deficient (rank {rank} of {M.shape[1]})")

    F = sol[:n * q].reshape((n, q), order="F")
    V = sol[n * q:].reshape((m, q), order="F")
    scale = max(1.0, np.linalg.norm(A, 2), np.linalg.norm(B, 2), np.linalg.norm(S, 2)) * \
        max(1.0, np.linalg.norm(F, 2) + np.linalg.norm(V, 2))
    r_dyn = float(np.linalg.norm(F @ S - A @ F - B @ V, 2))
    r_out = float(np.linalg.norm(C @ F - Iq, 2))
    if r_dyn > tol * scale or r_out > tol:
        raise RegulatorInfeasibleError("regulator equations have no solution",
                                       max(r_dyn, r_out))
    return F, V


def discretize_zoh(Ac, Bc=None, delta: float = 0.1) -> Tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold discretization of (Ac, Bc) with period delta"""
    Ac = _square(Ac, "Ac")
    n = Ac.shape[0]
    Bc = np.zeros((n, 0)) if Bc is None else as_matrix(Bc, "Bc")
    if Bc.shape[0] != n:
        raise DimensionError(f"Bc: expected {n} rows, got {Bc.shape[0]}")
    m = Bc.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = Ac
    aug[:n, n:] = Bc
    Phi = linalg.expm(aug * delta)
    return Phi[:n, :n], Phi[:n, n:]
