from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Any, Optional, List
import logging
from enum import Enum
import os

from quantrack.analysis import certify
from quantrack.config import ScenarioConfig
from quantrack.errors import LeaderOverflowError, QuantrackError
from quantrack.sim import build_scenario, simulate
from traceWriter import TraceWriter

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('Pipeline')


class PipelineStageType(Enum):
    """Pipeline processing stages"""
    VALIDATION = "validation"
    DESIGN = "design"
    SIMULATION = "simulation"
    ARTIFACTS = "artifacts"


@dataclass
class PipelineContext:
    """Context object passed through the pipeline stages"""
    config_path: Optional[str] = None
    config: Optional[ScenarioConfig] = None
    out_dir: str = "out"
    seed: Optional[int] = None
    stage_results: Dict[PipelineStageType, Any] = None
    errors: List[str] = None

    def __post_init__(self):
        self.stage_results = {}
        self.errors = []

    def add_stage_result(self, stage: PipelineStageType, result: Any):
        """Add a result from a pipeline stage"""
        self.stage_results[stage] = result

    def get_stage_result(self, stage: PipelineStageType) -> Optional[Any]:
        """Get a result from a pipeline stage"""
        return self.stage_results.get(stage)

    def add_error(self, error: str):
        """Add an error to the context"""
        self.errors.append(error)

    @property
    def run_dir(self) -> str:
        validation = self.get_stage_result(PipelineStageType.VALIDATION)
        name = validation["config"].name if validation else "scenario"
        return os.path.join(self.out_dir, name)


class PipelineStage(ABC):
    """Abstract base class for pipeline stages"""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @abstractmethod
    def process(self, context: PipelineContext) -> PipelineContext:
        """Process the pipeline stage

        Args:
            context: The pipeline context containing the scenario and stage results

        Returns:
            Updated pipeline context
        """
        pass

    @abstractmethod
    def validate(self, context: PipelineContext) -> bool:
        """Validate if the stage can process the context

        Args:
            context: The pipeline context to validate

        Returns:
            True if valid, False otherwise
        """
        pass


class ValidationStage(PipelineStage):
    """Loads the scenario config and builds the models"""

    def validate(self, context: PipelineContext) -> bool:
        return context.config is not None or context.config_path is not None

    def process(self, context: PipelineContext) -> PipelineContext:
        if not self.validate(context):
            context.add_error("No scenario given")
            return context

        try:
            config = context.config or ScenarioConfig.load(context.config_path)
            if context.seed is not None:
                config = config.with_overrides(seed=context.seed)
            scenario = build_scenario(config)
            for warning in scenario.warnings:
                self.logger.warning(f"Scenario '{config.name}': {warning}")
            context.add_stage_result(PipelineStageType.VALIDATION, {"config": config, "scenario": scenario})
        except QuantrackError as e:
            context.add_error(f"Invalid scenario: {str(e)}")
        return context


class DesignStage(PipelineStage):
    """Runs the design checks and, optionally, the saturation constants"""

    def __init__(self, with_constants: bool = True):
        super().__init__()
        self.with_constants = with_constants

    def validate(self, context: PipelineContext) -> bool:
        return context.get_stage_result(PipelineStageType.VALIDATION) is not None

    def process(self, context: PipelineContext) -> PipelineContext:
        if not self.validate(context):
            context.add_error("Cannot certify: scenario not validated")
            return context

        try:
            scenario = context.get_stage_result(PipelineStageType.VALIDATION)["scenario"]
            report = certify(scenario, with_constants=self.with_constants)
            if not report.zoom.passed:
                self.logger.warning("Zoom factors fail the design conditions; running in diagnostic mode")
            if not report.rates.passed:
                self.logger.warning("Leader data rate fails the design conditions; running in diagnostic mode")
            context.add_stage_result(PipelineStageType.DESIGN, report)
        except Exception as e:
            context.add_error(f"Design analysis failed: {str(e)}")
        return context


class SimulationStage(PipelineStage):
    """Simulates the closed loop"""

    def validate(self, context: PipelineContext) -> bool:
        return context.get_stage_result(PipelineStageType.VALIDATION) is not None

    def process(self, context: PipelineContext) -> PipelineContext:
        if not self.validate(context):
            context.add_error("Cannot simulate: scenario not validated")
            return context

        try:
            scenario = context.get_stage_result(PipelineStageType.VALIDATION)["scenario"]
            trace = simulate(scenario)
            report = context.get_stage_result(PipelineStageType.DESIGN)
            if report is not None:
                report.observed_max_q = trace.max_q_arg
                report.run_verdict = trace.verdict.value
            context.add_stage_result(PipelineStageType.SIMULATION, trace)
        except LeaderOverflowError as e:
            context.add_error(f"Leader codec overflow: {str(e)}")
        except Exception as e:
            context.add_error(f"Simulation failed: {str(e)}")
        return context


class ArtifactStage(PipelineStage):
    """Writes trace, report, plot and the replayable scenario"""

    def __init__(self, writer: TraceWriter):
        super().__init__()
        self.writer = writer

    def validate(self, context: PipelineContext) -> bool:
        return (
            context.get_stage_result(PipelineStageType.SIMULATION) is not None
            and context.get_stage_result(PipelineStageType.DESIGN) is not None
        )

    def process(self, context: PipelineContext) -> PipelineContext:
        if not self.validate(context):
            context.add_error("Cannot write artifacts: no trace or report")
            return context

        try:
            paths = self.writer.write_run(
                context.get_stage_result(PipelineStageType.SIMULATION),
                context.get_stage_result(PipelineStageType.DESIGN),
                context.run_dir,
            )
            context.add_stage_result(PipelineStageType.ARTIFACTS, paths)
        except Exception as e:
            context.add_error(f"Writing artifacts failed: {str(e)}")
        return context


class Pipeline:
    """Orchestrates the run pipeline"""

    def __init__(self, stages: List[PipelineStage]):
        self.stages = stages
        self.logger = logging.getLogger('Pipeline')

    def process(self, context: PipelineContext) -> PipelineContext:
        """Process a scenario through the pipeline stages

        Args:
            context: The pipeline context containing the scenario source

        Returns:
            Pipeline context containing results and any errors
        """
        for stage in self.stages:
            self.logger.info(f"Processing stage: {stage.__class__.__name__}")
            context = stage.process(context)

            if context.errors:
                self.logger.error(f"Pipeline failed: {context.errors[-1]}")
                break

        return context
