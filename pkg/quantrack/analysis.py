"""Design certification: zoom factors, data rates, saturation-free range
and the DoS resilience bound."""

import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import AnalysisError
from .lin_core import JordanDecomposition, spectral_radius
from .quantizers import LeaderQuantizerSpec
from .topology import StackedGains
from .types import BlockKind

logger = logging.getLogger('DesignAnalysis')

POWER_BLOCK = 4096
MAX_POWER_STEPS = 20_000_000


@dataclass
class ZoomVerdict:
    gamma1: float
    gamma2: float
    rho_g: float
    rho_s: float
    gamma1_ok: bool
    gamma2_ok: bool
    relaxed: bool = False     # gamma2 = rho(S_tilde) accepted for size-1 blocks

    @property
    def passed(self) -> bool:
        return self.gamma1_ok and self.gamma2_ok


@dataclass
class BlockRate:
    block: int
    modulus: float
    size: int
    rate: float
    b_ok: bool      # 2^R > zeta / gamma1
    c_ok: bool      # max(rho_g, zeta / 2^R) < gamma1 < 1

    @property
    def ratio(self) -> float:
        return self.modulus / 2.0 ** self.rate


@dataclass
class RateVerdict:
    blocks: List[BlockRate]

    @property
    def passed(self) -> bool:
        return all(b.b_ok and b.c_ok for b in self.blocks)


@dataclass
class DesignConstants:
    c1: float
    c2: float
    e_v: float
    c2_cutoff: int
    contraction_rate: float    # ||G_bar / gamma1|| in the weighted norm
    norm_inflation: float      # conversion factor from the weighted norm
    epsilon: float


@dataclass
class RangeRequirement:
    term_z: float
    term_alpha: float
    term_v: float
    total: float
    bits: int

    def levels(self, sigma: float) -> int:
        """Smallest R_f with (2 R_f + 1) sigma covering the total"""
        return max(int(math.ceil((self.total / sigma - 1) / 2)), 1)


def check_zoom_factors(gamma1: float, gamma2: float, gains: StackedGains,
                       dec: JordanDecomposition) -> ZoomVerdict:
    """rho(G) < gamma1 < 1 and gamma2 > rho(S).

    gamma2 = rho(S_tilde) is accepted when every block of maximal modulus
    has size 1.
    """
    rho_s = dec.rho
    gamma1_ok = gains.rho_g < gamma1 < 1
    gamma2_ok = gamma2 > rho_s
    relaxed = False
    if not gamma2_ok and math.isclose(gamma2, spectral_radius(dec.S_tilde), rel_tol=1e-12):
        top = [b for b in dec.blocks if math.isclose(b.modulus, rho_s, rel_tol=1e-12)]
        relaxed = gamma2_ok = all(b.size == 1 for b in top)
    return ZoomVerdict(gamma1=gamma1, gamma2=gamma2, rho_g=gains.rho_g, rho_s=rho_s,
                       gamma1_ok=gamma1_ok, gamma2_ok=gamma2_ok, relaxed=relaxed)


def check_rate(gamma1: float, rates: Sequence[float], dec: JordanDecomposition,
               rho_g: Optional[float] = None) -> RateVerdict:
    """Per-block data-rate conditions.

    Size-1 blocks admit equality in 2^R >= zeta / gamma1.
    """
    rates = list(rates)
    if len(rates) == 1:
        rates = rates * len(dec.blocks)
    if len(rates) != len(dec.blocks):
        raise AnalysisError(f"{len(rates)} rates for {len(dec.blocks)} Jordan blocks")
    checks = []
    for r, (block, rate) in enumerate(zip(dec.blocks, rates)):
        levels = 2.0 ** rate
        ratio = block.modulus / levels
        if block.size == 1:
            b_ok = levels >= block.modulus / gamma1
            c_ok = ratio <= gamma1
        else:
            b_ok = levels > block.modulus / gamma1
            c_ok = ratio < gamma1
        c_ok = c_ok and gamma1 < 1 and (rho_g is None or rho_g < gamma1)
        checks.append(BlockRate(block=r, modulus=block.modulus, size=block.size,
                                rate=float(rate), b_ok=b_ok, c_ok=c_ok))
    return RateVerdict(blocks=checks)


def _power_table(A: np.ndarray, size: int):
    """Stack A^0..A^(size-1) and return it with A^size"""
    n = A.shape[0]
    table = np.empty((size, n, n))
    table[0] = np.eye(n)
    filled, power = 1, A.copy()
    while filled < size:
        m = min(filled, size - filled)
        table[filled:filled + m] = table[:m] @ power
        filled += m
        power = power @ power
    return table, table[-1] @ A


def _c2(S_bar: np.ndarray, gamma2: float, max_steps: int):
    A = S_bar / gamma2
    if spectral_radius(A) >= 1:
        raise AnalysisError(f"rho(S_bar / gamma2) = {spectral_radius(A):.6g} >= 1")
    table, step = _power_table(A, POWER_BLOCK)
    base = np.eye(A.shape[0])
    running, m0 = 0.0, 0
    while m0 < max_steps:
        norms = np.linalg.norm(base @ table, ord=2, axis=(1, 2))
        below = np.flatnonzero(norms < 1)
        if below.size:
            cut = int(below[0])
            if cut:
                running = max(running, float(norms[:cut].max()))
            return running, m0 + cut
        running = max(running, float(norms.max()))
        base = base @ step
        m0 += POWER_BLOCK
    raise AnalysisError(f"powers of S_bar / gamma2 did not drop below 1 within {max_steps} steps")


def _e_v(S_tilde: np.ndarray, H: np.ndarray, gamma1: float, gamma2: float,
         omega_bar0: np.ndarray, max_steps: int) -> float:
    M = np.maximum(np.abs(S_tilde @ H / gamma1), np.abs(S_tilde / gamma2))
    rho = spectral_radius(M)
    if rho >= 1:
        raise AnalysisError(f"scaled leader error recursion is not contracting (rho = {rho:.6g})")
    c = (1 + rho) / 2
    n = M.shape[0]
    # weights with M d <= c d
    d = np.linalg.solve(np.eye(n) - M / c, np.ones(n))
    d_max = float(d.max())
    table, step = _power_table(M, POWER_BLOCK)
    w = np.abs(omega_bar0)
    running, k0 = 0.0, 0
    while k0 < max_steps:
        W = table @ w
        norms = np.abs(W).max(axis=1)
        prefix = np.maximum.accumulate(np.maximum(norms, running))
        tails = d_max * (W / d).max(axis=1)
        done = np.flatnonzero(tails <= prefix)
        if done.size:
            return float(prefix[done[0]])
        running = float(prefix[-1])
        w = step @ w
        k0 += POWER_BLOCK
    raise AnalysisError(f"leader error bound did not settle within {max_steps} steps")


def _exponents(dec: JordanDecomposition) -> np.ndarray:
    """Nondecreasing exponents of the diagonal similarity diag(eps^e)"""
    e = np.zeros(dec.n)
    level = 0
    for block in dec.blocks:
        for i in range(block.size):
            if block.kind == BlockKind.REAL:
                e[block.offset + i] = level
            else:
                e[block.offset + 2 * i: block.offset + 2 * i + 2] = level
            level += 1
    return e


def compute_constants(gains: StackedGains, dec: JordanDecomposition, gamma1: float, gamma2: float,
                      sigma: float, theta0: float, c_x0: float, *,
                      omega0: Optional[np.ndarray] = None,
                      rates: Optional[LeaderQuantizerSpec] = None,
                      max_steps: int = MAX_POWER_STEPS) -> DesignConstants:
    """Compute C1, C2 and E_v.

    C2 bounds ||(S_N / gamma2)^m||. E_v bounds ||omega(k) / theta_k||_inf
    over every jam sequence. C1 bounds ||alpha|| using a diagonal
    similarity diag(eps^e) under which S_N / gamma2 is non-expansive and
    G_bar / gamma1 contracts; eps is chosen on a grid to minimize C1.

    Args:
        omega0: Initial leader scaling; defaults to 1.1 * C_x0 per coordinate
        rates: Leader quantizer rates; defaults to one bit per block

    Raises:
        AnalysisError: If no contracting norm exists or a power iteration
            does not settle
    """
    n_v = dec.n
    N = gains.n_agents
    if omega0 is None:
        omega0 = np.full(n_v, 1.1 * c_x0)
    if rates is None:
        rates = LeaderQuantizerSpec.from_blocks(dec.blocks, [1.0])

    c2, cutoff = _c2(dec.S_bar, gamma2, max_steps)
    e_v = _e_v(dec.S_tilde, rates.H, gamma1, gamma2, np.asarray(omega0, dtype=float) / theta0, max_steps)

    e = np.tile(_exponents(dec), N)
    e_max = float(e.max()) if e.size else 0.0
    A_s = gains.S_N / gamma2
    A_g = gains.G_bar / gamma1
    root = math.sqrt(N * n_v)
    alpha0 = 2 * root * c_x0 / theta0
    b = (np.linalg.norm(gains.P, 2) * root * sigma / gamma1
         + np.linalg.norm(gains.W, 2) * root * e_v / gamma1)

    best = None
    for eps in np.logspace(0, -12, 241):
        dv = eps ** e
        similarity = dv[None, :] / dv[:, None]
        if np.linalg.norm(A_s * similarity, 2) > 1 + 1e-12:
            continue
        c_g = float(np.linalg.norm(A_g * similarity, 2))
        if c_g >= 1:
            continue
        kappa = eps ** -e_max
        c1 = kappa * max(alpha0, b / (1 - c_g))
        if best is None or c1 < best[0]:
            best = (c1, c_g, kappa, float(eps))
    if best is None:
        raise AnalysisError("no diagonal similarity makes G_bar / gamma1 contracting")

    c1, c_g, kappa, eps = best
    logger.info(f"Constants: C1={c1:.4e}, C2={c2:.4e} (cutoff {cutoff}), E_v={e_v:.4e}, eps={eps:.3e}")
    return DesignConstants(c1=c1, c2=c2, e_v=e_v, c2_cutoff=cutoff,
                           contraction_rate=c_g, norm_inflation=kappa, epsilon=eps)


def required_range(constants: DesignConstants, gains: StackedGains, sigma: float, gamma1: float,
                   e_v: Optional[float] = None) -> RangeRequirement:
    """Lower bound on (2 R_f + 1) sigma for saturation-free follower quantizers.

    ``e_v`` overrides the computed leader bound (sigma / gamma1 recovers the
    homogeneous-quantizer case).
    """
    e_v = constants.e_v if e_v is None else e_v
    root = math.sqrt(gains.n_agents * gains.n_v)
    lead = constants.c2 * np.linalg.norm(gains.S_N, 2)
    term_z = lead * np.linalg.norm(gains.Z, 2) * root * sigma / gamma1
    term_alpha = lead * np.linalg.norm(gains.P, 2) * constants.c1
    term_v = lead * np.linalg.norm(gains.W, 2) * root * e_v
    total = float(term_z + term_alpha + term_v)
    levels = max((total / sigma - 1) / 2 + 1, 1.0)
    bits = int(math.ceil(math.log2(levels))) + 1
    return RangeRequirement(term_z=float(term_z), term_alpha=float(term_alpha),
                            term_v=float(term_v), total=total, bits=bits)


def resilience_bound(gamma1: float, gamma2: float, zeta: float, rate: float):
    """Admissible 1/T + delta/tau_D for the follower zoom factors (bound) and
    for the leader data rate (ceiling).

    Returns:
        (bound, ceiling)

    Raises:
        ValueError: Unless 0 < gamma1 < 1 < gamma2 and 0 <= zeta / 2^R < 1
    """
    if not 0 < gamma1 < 1 < gamma2:
        raise ValueError(f"need 0 < gamma1 < 1 < gamma2, got {gamma1}, {gamma2}")
    ratio = zeta / 2.0 ** rate
    if not 0 <= ratio < 1:
        raise ValueError(f"zeta / 2^R = {ratio:.6g} must lie in [0, 1)")
    log_g2 = math.log(gamma2)
    bound = 1 - log_g2 / (log_g2 - math.log(gamma1))
    ceiling = 1.0 if ratio == 0 else 1 - log_g2 / (log_g2 - math.log(ratio))
    return bound, ceiling


@dataclass
class DesignReport:
    """Certification summary for one scenario"""
    name: str
    rho_s: float
    rho_g: float
    zoom: ZoomVerdict
    rates: RateVerdict
    mode_radii: List[float]
    binding_block: int
    bound: Optional[float]
    ceiling: Optional[float]
    dos_sum: float
    configured_range: float
    constants: Optional[DesignConstants] = None
    requirement: Optional[RangeRequirement] = None
    observed_max_q: Optional[float] = None
    run_verdict: Optional[str] = None
    notes: List[str] = field(default_factory=list)

    @property
    def dos_admissible(self) -> bool:
        return self.bound is not None and self.dos_sum < self.bound

    @property
    def range_certified(self) -> Optional[bool]:
        if self.requirement is None:
            return None
        return self.configured_range >= self.requirement.total

    def to_text(self) -> str:
        def fmt(x) -> str:
            return "n/a" if x is None else f"{x:.6g}"

        lines = [f"# design report: {self.name}", "", "[spectra]",
                 f"rho_S: {fmt(self.rho_s)}",
                 f"rho_G: {fmt(self.rho_g)}",
                 "mode_radii: " + ", ".join(f"{r:.6g}" for r in self.mode_radii),
                 "", "[zoom factors]",
                 f"gamma1: {fmt(self.zoom.gamma1)} (needs rho_G < gamma1 < 1): "
                 f"{'pass' if self.zoom.gamma1_ok else 'fail'}",
                 f"gamma2: {fmt(self.zoom.gamma2)} (needs gamma2 > rho_S): "
                 f"{'pass' if self.zoom.gamma2_ok else 'fail'}"
                 + (" (size-1 relaxation)" if self.zoom.relaxed else ""),
                 "", "[data rates]"]
        for b in self.rates.blocks:
            lines.append(f"block {b.block}: zeta={b.modulus:.6g} size={b.size} R={b.rate:g} "
                         f"zeta/2^R={b.ratio:.6g} rate_condition={'pass' if b.b_ok else 'fail'} "
                         f"gamma1_condition={'pass' if b.c_ok else 'fail'}")
        lines += ["", "[resilience]",
                  f"bound: {fmt(self.bound)}",
                  f"ceiling: {fmt(self.ceiling)} (block {self.binding_block})",
                  f"measured_dos_sum: {fmt(self.dos_sum)}",
                  f"dos_admissible: {'yes' if self.dos_admissible else 'no'}"]
        lines += ["", "[saturation]", f"configured_range: {fmt(self.configured_range)}"]
        if self.constants is not None:
            c = self.constants
            lines += [f"C1: {fmt(c.c1)}", f"C2: {fmt(c.c2)} (cutoff {c.c2_cutoff})", f"E_v: {fmt(c.e_v)}",
                      f"weighted_norm_contraction: {fmt(c.contraction_rate)}",
                      f"norm_inflation: {fmt(c.norm_inflation)} (eps {c.epsilon:.3e})"]
        if self.requirement is not None:
            r = self.requirement
            lines += [f"required_range: {fmt(r.total)} "
                      f"(z {fmt(r.term_z)}, alpha {fmt(r.term_alpha)}, v {fmt(r.term_v)})",
                      f"required_bits: {r.bits}",
                      f"range_certified: {'yes' if self.range_certified else 'no'}"]
        if self.observed_max_q is not None or self.run_verdict is not None:
            lines += ["", "[run]", f"observed_max_q_argument: {fmt(self.observed_max_q)}",
                      f"verdict: {self.run_verdict or 'n/a'}"]
        if self.notes:
            lines += ["", "[notes]"] + [f"- {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def certify(scenario, with_constants: bool = True, max_steps: int = MAX_POWER_STEPS) -> DesignReport:
    """Run every design check for a built scenario"""
    codec = scenario.config.codec
    dec, gains = scenario.dec, scenario.gains
    zoom = check_zoom_factors(codec.gamma1, codec.gamma2, gains, dec)
    rates = check_rate(codec.gamma1, scenario.leader_spec.bits_per_block, dec, gains.rho_g)
    notes = ["sqrt(N v) in the range formula is read as sqrt(N n_v), n_v the leader state dimension"]

    binding = max(range(len(rates.blocks)), key=lambda r: rates.blocks[r].ratio)
    bound = ceiling = None
    try:
        bound, ceiling = resilience_bound(codec.gamma1, codec.gamma2, rates.blocks[binding].modulus,
                                          rates.blocks[binding].rate)
    except ValueError as e:
        notes.append(f"resilience bound unavailable: {str(e)}")

    report = DesignReport(
        name=scenario.config.name, rho_s=dec.rho, rho_g=gains.rho_g, zoom=zoom, rates=rates,
        mode_radii=list(gains.mode_radii), binding_block=binding, bound=bound, ceiling=ceiling,
        dos_sum=scenario.dos.averaged_budget().total,
        configured_range=(2 * codec.levels + 1) * codec.sigma, notes=notes,
    )

    if not with_constants:
        return report
    if not (zoom.passed and rates.passed):
        notes.append("constants skipped: zoom-factor or rate conditions fail")
        return report
    try:
        report.constants = compute_constants(
            gains, dec, codec.gamma1, codec.gamma2, codec.sigma, scenario.theta0, scenario.c_x0,
            omega0=scenario.omega0, rates=scenario.leader_spec, max_steps=max_steps)
        report.requirement = required_range(report.constants, gains, codec.sigma, codec.gamma1)
    except AnalysisError as e:
        notes.append(f"constants unavailable: {str(e)}")
        logger.warning(f"Constant computation failed: {str(e)}")
    return report
