# main.py
"""Main entry point for the quantized tracking experiments."""

import sys
import click
import logging
from typing import Optional

from dotenv import load_dotenv

from experimentNode import ExperimentNode
from quantrack.config import Settings
from quantrack.errors import QuantrackError
from replayVerifier import ReplayVerifier

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('Main')

BANNER = r"""
   ____                   _                  _
  / __ \ _  _ __ _ _ _  | |_ _ _ __ _ __ | |__
 | (__) | || / _` | ' \ |  _| '_/ _` / _|| / /
  \__\_\\_,_\__,_|_||_| \__|_| \__,_\__||_\_\
Quantized output tracking under DoS
"""


def _settings(out_dir: Optional[str], no_plots: bool) -> Settings:
    load_dotenv()
    settings = Settings.from_env()
    logging.getLogger().setLevel(getattr(logging, settings.log_level, logging.INFO))
    if out_dir:
        settings.out_dir = out_dir
    if no_plots:
        settings.no_plots = True
    return settings


def _node(out_dir: Optional[str], no_plots: bool) -> ExperimentNode:
    settings = _settings(out_dir, no_plots)
    return ExperimentNode(settings=settings, out_dir=settings.out_dir, no_plots=settings.no_plots)


@click.group()
def cli():
    """Quantized leader-follower tracking: run, sweep, replay and certify scenarios"""
    pass


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--seed', type=int, default=None, help='Override the DoS generator seed')
@click.option('--out-dir', default=None, help='Directory for run artifacts')
@click.option('--no-plots', is_flag=True, help='Skip the tracking-error plot')
def run(config: str, seed: Optional[int], out_dir: Optional[str], no_plots: bool):
    """Simulate one scenario and write its artifacts

    Exit codes: 0 converged, 2 diverged, 3 overflow, 1 configuration or
    internal error.
    """
    print(BANNER)
    try:
        node = _node(out_dir, no_plots)
        result = node.run_scenario(config, seed=seed)
    except Exception as e:
        logger.error(f"Run failed: {str(e)}")
        sys.exit(1)

    if not result.ok:
        for error in result.context.errors:
            click.echo(f"error: {error}", err=True)
        sys.exit(1)
    click.echo(f"verdict: {result.verdict.value}")
    click.echo(f"artifacts: {result.run_dir}")
    sys.exit(result.exit_code)


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.argument('grid', type=click.Path(exists=True, dir_okay=False))
@click.option('--seed', type=int, default=None, help='Override the DoS generator seed')
@click.option('--out-dir', default=None, help='Directory for the sweep table')
@click.option('--no-plots', is_flag=True, help='Accepted for symmetry; sweeps write no plots')
def sweep(config: str, grid: str, seed: Optional[int], out_dir: Optional[str], no_plots: bool):
    """Run a parameter grid over gamma1, gamma2, rates and dos_target"""
    print(BANNER)
    try:
        node = _node(out_dir, no_plots)
        result = node.run_sweep(config, grid, seed=seed)
    except Exception as e:
        logger.error(f"Sweep failed: {str(e)}")
        sys.exit(1)

    for row in result.rows:
        click.echo(f"cell {row['cell']}: {row['verdict']}")
    click.echo(f"table: {result.path}")
    sys.exit(0)


@cli.command()
@click.argument('trace', type=click.Path(exists=True))
def replay(trace: str):
    """Re-simulate a recorded run and compare it with its trace"""
    print(BANNER)
    try:
        _settings(None, False)
        result = ReplayVerifier().verify(trace)
    except (QuantrackError, OSError) as e:
        logger.error(f"Replay failed: {str(e)}")
        sys.exit(1)

    click.echo(result.describe())
    if result.case_report is not None:
        click.echo(f"case dynamics residual: {result.case_report.max_residual:.3e}")
    sys.exit(0 if result.ok else 1)


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--out-dir', default=None, help='Directory for the report')
def certify(config: str, out_dir: Optional[str]):
    """Run the design checks without simulating"""
    print(BANNER)
    try:
        node = _node(out_dir, True)
        report = node.certify(config)
    except Exception as e:
        logger.error(f"Certification failed: {str(e)}")
        sys.exit(1)

    if report is None:
        sys.exit(1)
    click.echo(report.to_text())
    sys.exit(0)


if __name__ == '__main__':
    cli()
