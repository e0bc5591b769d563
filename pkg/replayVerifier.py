# replayVerifier.py
"""Re-simulates a recorded run and compares it with its trace bit for bit."""

import os
import logging
from dataclasses import dataclass
from typing import Optional

from quantrack.config import ScenarioConfig
from quantrack.errors import QuantrackError
from quantrack.sim import CaseReport, build_scenario, simulate, case_dynamics_check
from traceWriter import SCENARIO_FILE, TRACE_FILE, read_trace, trace_header, trace_rows

logger = logging.getLogger('ReplayVerifier')


class ReplayError(QuantrackError, FileNotFoundError):
    """A run directory lacks the files needed for replay"""


@dataclass
class ReplayResult:
    status: str                          # "ok" or "mismatch"
    step: Optional[int] = None
    column: Optional[str] = None
    expected: Optional[str] = None       # value stored in the trace
    found: Optional[str] = None          # value from the re-simulation
    case_report: Optional[CaseReport] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def describe(self) -> str:
        if self.ok:
            return "replay ok"
        where = "header" if self.step is None else f"step {self.step}"
        return f"replay mismatch at {where}, column {self.column}: trace has {self.expected}, replay gives {self.found}"


class ReplayVerifier:
    def __init__(self):
        self.logger = logging.getLogger('ReplayVerifier')

    @staticmethod
    def _locate(path: str):
        run_dir = path if os.path.isdir(path) else os.path.dirname(os.path.abspath(path))
        trace_path = path if os.path.isfile(path) else os.path.join(run_dir, TRACE_FILE)
        scenario_path = os.path.join(run_dir, SCENARIO_FILE)
        for required in (trace_path, scenario_path):
            if not os.path.isfile(required):
                raise ReplayError(f"missing replay input: {required}")
        return run_dir, trace_path, scenario_path

    def verify(self, path: str) -> ReplayResult:
        """Replay the run stored at ``path`` (a run directory or its trace.csv)

        Raises:
            ReplayError: When the trace or the resolved scenario is missing
        """
        run_dir, trace_path, scenario_path = self._locate(path)
        config = ScenarioConfig.load(scenario_path)
        trace = simulate(build_scenario(config))
        recorded = read_trace(trace_path)
        if not recorded:
            return ReplayResult(status="mismatch", column="header", expected="", found="k")

        header = trace_header(trace)
        if recorded[0] != header:
            bad = next((i for i, (a, b) in enumerate(zip(recorded[0], header)) if a != b),
                       min(len(recorded[0]), len(header)))
            return ReplayResult(
                status="mismatch", column=header[bad] if bad < len(header) else recorded[0][bad],
                expected=recorded[0][bad] if bad < len(recorded[0]) else "",
                found=header[bad] if bad < len(header) else "")

        replayed = list(trace_rows(trace))
        for k, (stored, fresh) in enumerate(zip(recorded[1:], replayed)):
            if stored != fresh:
                col = next((i for i, (a, b) in enumerate(zip(stored, fresh)) if a != b), len(fresh) - 1)
                result = ReplayResult(status="mismatch", step=k, column=header[col],
                                      expected=stored[col] if col < len(stored) else "", found=fresh[col])
                self.logger.warning(result.describe())
                return result
        if len(recorded) - 1 != len(replayed):
            k = min(len(recorded) - 1, len(replayed))
            return ReplayResult(status="mismatch", step=k, column="k",
                                expected=str(len(recorded) - 1), found=str(len(replayed)))

        report = case_dynamics_check(trace)
        if not report.ok:
            self.logger.warning(f"Case dynamics residual {report.max_residual:.3e} exceeds 1e-8 "
                                f"(step {report.worst_step})")
        self.logger.info(f"Replay of {run_dir} matches {len(replayed)} rows")
        return ReplayResult(status="ok", case_report=report)
