"""Closed-loop simulation of the quantized leader-follower network."""

from .agents import AgentModel, LeaderModel, control_input
from .observer import observer_step, network_observer_step
from .scenario import Scenario, build_scenario, load_dos
from .engine import SimEvent, SimTrace, simulate, settling_time
from .cases import CaseReport, case_dynamics_check

__all__ = [
    'AgentModel', 'LeaderModel', 'control_input',
    'observer_step', 'network_observer_step',
    'Scenario', 'build_scenario', 'load_dos',
    'SimEvent', 'SimTrace', 'simulate', 'settling_time',
    'CaseReport', 'case_dynamics_check',
]
