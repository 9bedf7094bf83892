"""
Command line: run a scenario, replay its events.log, or compare controllers.

    python -m junctionsim.app.cli run --scenario paper-s4 --controller FIXED
    python -m junctionsim.app.cli replay --scenario paper-s4 --run-dir runs/paper-s4-dt3p
    python -m junctionsim.app.cli compare --scenario paper-s4 --duration 4-cycles

Exit codes: 0 ok, 2 scenario error, 3 replay mismatch, 4 contract or
matrix delivery failure, 1 anything else.
"""
import logging
import os
from pathlib import Path
from typing import Annotated, Optional

import typer
from dotenv import load_dotenv

from junctionsim.core.orchestrator import DEFAULT_OUT_DIR, compare, replay, run_experiment, write_outputs
from junctionsim.core.scenario import ControllerKind, ScenarioConfig, load_scenario, with_overrides
from junctionsim.errors import JunctionSimError

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help="DT3P intersection simulator")

ScenarioOpt = Annotated[str, typer.Option("--scenario", "-s", help="Scenario name or YAML path")]
ControllerOpt = Annotated[Optional[ControllerKind], typer.Option("--controller", "-c", case_sensitive=False)]
DurationOpt = Annotated[Optional[str], typer.Option("--duration", "-d", help="Seconds, '4-cycles' or '1h'")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed")]
OutDirOpt = Annotated[Optional[Path], typer.Option("--out-dir", "-o", help="Output directory")]


def _setup_logging() -> None:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("JUNCTIONSIM_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _load(scenario: str, controller, duration, seed) -> ScenarioConfig:
    return with_overrides(load_scenario(scenario), controller=controller, duration=duration, seed=seed)


def _fail(exc: JunctionSimError) -> None:
    typer.echo(f"error: {exc}", err=True)
    raise typer.Exit(code=exc.exit_code)


@app.callback()
def main() -> None:
    _setup_logging()


@app.command()
def run(
    scenario: ScenarioOpt = "paper-s4",
    controller: ControllerOpt = None,
    duration: DurationOpt = None,
    seed: SeedOpt = None,
    out_dir: OutDirOpt = None,
) -> None:
    """Run one scenario and write frames.csv, decisions.log and events.log."""
    try:
        config = _load(scenario, controller, duration, seed)
        result = run_experiment(config)
        target = out_dir or Path(DEFAULT_OUT_DIR) / f"{config.name}-{config.controller.value.lower()}"
        paths = write_outputs(result, target)
    except JunctionSimError as exc:
        _fail(exc)
        return
    summary = result.summary()
    typer.echo(
        f"{config.controller.value}: {len(result.decisions)} decisions, "
        f"final std {summary['final_std']:.2f}, spread {summary['spread']:.0f}, "
        f"utilization {summary['utilization']:.3f}"
    )
    typer.echo(f"frames: {paths.frames}")


@app.command("replay")
def replay_command(
    run_dir: Annotated[Path, typer.Option("--run-dir", "-r", help="Directory holding events.log and decisions.log")],
    scenario: ScenarioOpt = "paper-s4",
    controller: ControllerOpt = None,
) -> None:
    """Re-drive the controller from events.log and check it reproduces decisions.log."""
    try:
        config = _load(scenario, controller, None, None)
        decisions = run_dir / config.outputs.decisions
        replayed = replay(config, run_dir / config.outputs.events, decisions if decisions.exists() else None)
    except JunctionSimError as exc:
        _fail(exc)
        return
    typer.echo(f"replayed {len(replayed)} decisions: OK")


@app.command("compare")
def compare_command(
    scenario: ScenarioOpt = "paper-s4",
    duration: DurationOpt = None,
    seed: SeedOpt = None,
    out_dir: OutDirOpt = None,
) -> None:
    """Run DT3P, FIXED and ACTUATED on the same seed and write compare.csv."""
    try:
        config = _load(scenario, None, duration, seed)
        target = out_dir or Path(DEFAULT_OUT_DIR) / f"{config.name}-compare"
        table, _ = compare(config, target)
    except JunctionSimError as exc:
        _fail(exc)
        return
    typer.echo(table.to_string(index=False))


if __name__ == "__main__":
    app()
