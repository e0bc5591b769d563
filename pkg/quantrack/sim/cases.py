"""Audit of a trace against the switched scaled-error dynamics.

With alpha = delta / theta, xi_z = e_z / theta and xi_v = e_v / theta
(delta = z_bar - 1 (x) v_bar, e_z = z_hat - z_bar, e_v = v_hat - v_bar),
the quantizer argument at k + 1 is

    a = -Z xi_z - P alpha + W (1 (x) xi_v)    if k succeeded
    a = -S_N xi_z                             if k was jammed

and alpha(k+1), xi_z(k+1) follow from a and the jam flag at k + 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..types import StepCase
from .engine import SimTrace

logger = logging.getLogger('CaseCheck')


@dataclass
class CaseReport:
    max_residual: float
    by_case: Dict[StepCase, float]
    counts: Dict[StepCase, int]
    worst_step: int
    skipped: int = 0          # transitions across a leader speed jump
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.max_residual <= 1e-8


def case_dynamics_check(trace: SimTrace) -> CaseReport:
    """Recompute alpha, xi_z and the quantizer arguments one step ahead
    from the recorded states and compare with the simulated values.

    Residuals are relative to the magnitude of the scaled states.
    """
    scenario = trace.scenario
    gains = scenario.gains
    gamma1 = scenario.config.codec.gamma1
    gamma2 = scenario.config.codec.gamma2
    N, n_v = scenario.n_agents, scenario.n_v
    ones = np.ones(N)
    jump_step = scenario.speed_step_index

    def scaled(k: int):
        theta = trace.theta[k]
        z_bar = trace.z_bar[k].reshape(-1)
        stacked_v = np.kron(ones, trace.v_bar[k])
        alpha = (z_bar - stacked_v) / theta
        xi_z = (trace.z_hat[k].reshape(-1) - z_bar) / theta
        xi_v = (trace.v_hat[k] - trace.v_bar[k]) / theta
        scale = (np.linalg.norm(z_bar) + np.linalg.norm(trace.v_bar[k]) + np.linalg.norm(trace.z_hat[k])
                 + np.linalg.norm(trace.v_hat[k])) / theta
        return alpha, xi_z, xi_v, max(scale, 1.0)

    by_case = {case: 0.0 for case in StepCase}
    counts = {case: 0 for case in StepCase}
    worst, worst_step, skipped = 0.0, -1, 0
    parts = {"argument": 0.0, "alpha": 0.0, "xi_z": 0.0}

    for k in range(trace.steps):
        if k + 1 == jump_step:
            skipped += 1
            continue
        jam_now, jam_next = bool(trace.jam[k]), bool(trace.jam[k + 1])
        case = StepCase.of(jam_now, jam_next)
        alpha, xi_z, xi_v, scale_now = scaled(k)
        alpha_next, xi_z_next, _, scale = scaled(k + 1)
        gamma = gamma2 if jam_next else gamma1

        if jam_now:
            a = -gains.S_N @ xi_z
            alpha_pred = gains.S_N @ alpha / gamma
        else:
            a = -gains.Z @ xi_z - gains.P @ alpha + gains.W @ np.kron(ones, xi_v)
            alpha_pred = (gains.G @ alpha - gains.P @ xi_z + gains.W @ np.kron(ones, xi_v)) / gamma
        if jam_next:
            xi_pred = -a / gamma2
        else:
            xi_pred = (trace.q_values[k + 1].reshape(-1) - a) / gamma1

        # arguments are scaled by theta_k, the rest by theta_{k+1}
        r_arg = np.max(np.abs(a - trace.q_args[k + 1].reshape(-1))) / scale_now
        r_alpha = np.max(np.abs(alpha_pred - alpha_next)) / scale
        r_xi = np.max(np.abs(xi_pred - xi_z_next)) / scale
        r = max(r_arg, r_alpha, r_xi)
        parts["argument"] = max(parts["argument"], r_arg)
        parts["alpha"] = max(parts["alpha"], r_alpha)
        parts["xi_z"] = max(parts["xi_z"], r_xi)
        counts[case] += 1
        by_case[case] = max(by_case[case], r)
        if r > worst:
            worst, worst_step = r, k + 1

    report = CaseReport(max_residual=worst, by_case=by_case, counts=counts,
                        worst_step=worst_step, skipped=skipped, details=parts)
    logger.info(f"Case dynamics residual {worst:.3e} over {trace.steps} transitions "
                f"(worst at step {worst_step})")
    return report
