# experimentNode.py
import os
import itertools
import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

import json5
from dotenv import load_dotenv

from pipeline import (
    Pipeline, PipelineContext, PipelineStageType,
    ValidationStage, DesignStage, SimulationStage, ArtifactStage,
)
from quantrack.analysis import DesignReport
from quantrack.config import ScenarioConfig, Settings
from quantrack.errors import ConfigError
from quantrack.types import Verdict
from traceWriter import TraceWriter

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

SWEEP_FILE = "sweep.csv"
SWEEP_KEYS = ("gamma1", "gamma2", "rates", "dos_target")
SWEEP_COLUMNS = ["cell", "gamma1", "gamma2", "rates", "dos_target", "dos_sum",
                 "bound", "ceiling", "verdict", "final_error", "max_q_arg", "error"]


@dataclass
class RunResult:
    """Outcome of one scenario run"""
    context: PipelineContext
    verdict: Optional[Verdict] = None
    run_dir: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.context.errors

    @property
    def exit_code(self) -> int:
        if not self.ok or self.verdict is None:
            return 1
        return self.verdict.exit_code


@dataclass
class SweepResult:
    rows: List[Dict[str, str]]
    path: Optional[str] = None


def load_grid(grid: Union[str, Dict[str, Any]]) -> Dict[str, List[Any]]:
    """Read a sweep grid; keys outside the supported set are rejected"""
    if isinstance(grid, str):
        try:
            with open(grid) as f:
                grid = json5.loads(f.read())
        except (OSError, ValueError) as e:
            raise ConfigError("grid", f"cannot read {grid}: {str(e)}")
    if not isinstance(grid, dict):
        raise ConfigError("grid", "expected a mapping of parameter lists")
    cleaned = {}
    for key, values in grid.items():
        if key not in SWEEP_KEYS:
            raise ConfigError(f"grid.{key}", f"unknown sweep parameter (use {', '.join(SWEEP_KEYS)})")
        if not isinstance(values, list):
            raise ConfigError(f"grid.{key}", "expected a list")
        cleaned[key] = values
    return cleaned


def grid_cells(grid: Dict[str, List[Any]]) -> List[Dict[str, Any]]:
    """Cartesian product in the fixed key order gamma1, gamma2, rates, dos_target"""
    keys = [k for k in SWEEP_KEYS if k in grid]
    if not keys or any(len(grid[k]) == 0 for k in keys):
        return []
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else format(float(value), ".17g")


class ExperimentNode:
    def __init__(self, settings: Optional[Settings] = None, out_dir: Optional[str] = None,
                 no_plots: Optional[bool] = None):
        """Initialize the experiment node

        Args:
            settings: Process settings; read from the environment when omitted
            out_dir: Overrides the output directory from the settings
            no_plots: Overrides the plot toggle from the settings
        """
        self.logger = logging.getLogger('ExperimentNode')
        # Load environment variables
        load_dotenv()
        self.settings = settings or Settings.from_env()
        self.out_dir = out_dir or self.settings.out_dir
        self.no_plots = self.settings.no_plots if no_plots is None else no_plots
        self._initialize_components()
        self._print_mode_info()

    def _initialize_components(self):
        """Initialize the artifact writer and the stage lists"""
        os.makedirs(self.out_dir, exist_ok=True)
        self.writer = TraceWriter(no_plots=self.no_plots)
        self.run_pipeline = Pipeline([
            ValidationStage(), DesignStage(with_constants=True), SimulationStage(), ArtifactStage(self.writer),
        ])
        # sweep cells skip the constant computation and artifacts
        self.cell_pipeline = Pipeline([ValidationStage(), DesignStage(with_constants=False), SimulationStage()])
        self.certify_pipeline = Pipeline([ValidationStage(), DesignStage(with_constants=True)])

    def _print_mode_info(self):
        self.logger.info(f"Output directory: {self.out_dir}")
        self.logger.info(f"Sweep workers: {self.settings.workers}")
        if self.no_plots:
            self.logger.info("Plots disabled")

    def run_scenario(self, config_path: str, seed: Optional[int] = None) -> RunResult:
        """Validate, certify, simulate and write the artifacts of one scenario

        Args:
            config_path: Path to the JSON5 scenario file
            seed: Overrides the DoS generator seed

        Returns:
            RunResult with the verdict and the run directory
        """
        self.logger.info(f"Running scenario {config_path}")
        context = self.run_pipeline.process(
            PipelineContext(config_path=config_path, out_dir=self.out_dir, seed=seed))
        result = RunResult(context=context)
        trace = context.get_stage_result(PipelineStageType.SIMULATION)
        if trace is not None:
            result.verdict = trace.verdict
        if context.get_stage_result(PipelineStageType.ARTIFACTS) is not None:
            result.run_dir = context.run_dir
        if result.ok:
            self.logger.info(f"Scenario finished: {result.verdict.value} "
                             f"(final error {trace.final_error:.3e}, max |Q-arg| {trace.max_q_arg:.3g})")
        return result

    def certify(self, config_path: str) -> Optional[DesignReport]:
        """Design checks only; None when the scenario does not validate"""
        context = self.certify_pipeline.process(PipelineContext(config_path=config_path, out_dir=self.out_dir))
        if context.errors:
            return None
        return context.get_stage_result(PipelineStageType.DESIGN)

    def _run_cell(self, task) -> Dict[str, str]:
        index, base, params = task
        row = {"cell": str(index)}
        row.update({k: json5.dumps(params[k]) if k in params else "" for k in SWEEP_KEYS})
        try:
            config = base.with_overrides(**params)
        except ConfigError as e:
            row.update(verdict="error", error=str(e))
            return row
        context = self.cell_pipeline.process(PipelineContext(config=config, out_dir=self.out_dir))
        report = context.get_stage_result(PipelineStageType.DESIGN)
        trace = context.get_stage_result(PipelineStageType.SIMULATION)
        if report is not None:
            row.update(dos_sum=_fmt(report.dos_sum), bound=_fmt(report.bound), ceiling=_fmt(report.ceiling))
        if context.errors:
            row.update(verdict="error", error=context.errors[-1])
        else:
            row.update(verdict=trace.verdict.value, final_error=_fmt(trace.final_error),
                       max_q_arg=_fmt(trace.max_q_arg))
        return row

    def run_sweep(self, config_path: str, grid: Union[str, Dict[str, Any]],
                  seed: Optional[int] = None, name: Optional[str] = None) -> SweepResult:
        """Run every grid cell and write the summary table

        Cells run in a thread pool; rows come back in grid order. A failing
        cell is recorded with verdict ``error`` and does not stop the sweep.
        """
        base = ScenarioConfig.load(config_path)
        if seed is not None:
            base = base.with_overrides(seed=seed)
        cells = grid_cells(load_grid(grid))
        sweep_dir = os.path.join(self.out_dir, name or f"{base.name}_sweep")
        os.makedirs(sweep_dir, exist_ok=True)
        self.logger.info(f"Sweeping {len(cells)} cells of {base.name}")

        tasks = [(i, base, params) for i, params in enumerate(cells)]
        with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, self.settings.workers)) as ex:
            rows = list(ex.map(self._run_cell, tasks))

        path = self.writer.write_sweep(rows, os.path.join(sweep_dir, SWEEP_FILE), SWEEP_COLUMNS)
        failed = sum(1 for r in rows if r["verdict"] == "error")
        if failed:
            self.logger.warning(f"{failed} of {len(rows)} sweep cells failed")
        self.logger.info(f"Wrote sweep table to {path}")
        return SweepResult(rows=rows, path=path)
