"""Quantized output tracking of heterogeneous multi-agent systems under DoS."""

from .config import ScenarioConfig, Settings
from .types import BlockKind, StepCase, Verdict
from .errors import QuantrackError, ConfigError
from .sim import Scenario, SimTrace, build_scenario, simulate, case_dynamics_check
from .analysis import DesignReport, certify

__all__ = [
    'ScenarioConfig', 'Settings',
    'BlockKind', 'StepCase', 'Verdict',
    'QuantrackError', 'ConfigError',
    'Scenario', 'SimTrace', 'build_scenario', 'simulate', 'case_dynamics_check',
    'DesignReport', 'certify',
]
