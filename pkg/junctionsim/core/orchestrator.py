"""
Experiment orchestration: run one scenario, write its outputs, replay an
events.log, and compare the three controllers on one scenario.

Run:     build world -> tick until duration -> frames at 1 s cadence
Replay:  feed events.log back through a fresh driver -> same decisions
Compare: DT3P / FIXED / ACTUATED on the same seed, in a thread pool
"""
import concurrent.futures
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from junctionsim.core.baselines import ActuatedController, FixedTimeController
from junctionsim.core.controller import Dt3pController, SignalController
from junctionsim.core.driver import ControllerDriver
from junctionsim.core.scenario import ControllerKind, OutputPaths, ScenarioConfig, with_overrides
from junctionsim.errors import ReplayMismatch
from junctionsim.logic.intersection import NodeId
from junctionsim.messaging.records import DecisionRecord, TickMarker, read_decisions, read_events, write_lines
from junctionsim.metrics.frames import MetricsFrame, MetricsRecorder, frames_to_dataframe, write_frames_csv
from junctionsim.metrics.utilization import Departure, GreenInterval, green_splits, summarize
from junctionsim.road.world import World, build_world, close_green_log, step

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = os.getenv("JUNCTIONSIM_OUT_DIR", "runs")
MAX_WORKERS = int(os.getenv("JUNCTIONSIM_MAX_WORKERS", "3"))

_EPS = 1e-9


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    world: World
    frames: List[MetricsFrame]
    decisions: List[DecisionRecord]
    transcript: list
    lit_history: List[Tuple[float, Tuple[NodeId, ...]]] = field(default_factory=list)

    @property
    def green_log(self) -> List[GreenInterval]:
        return self.world.green_log

    @property
    def departure_log(self) -> List[Departure]:
        return self.world.departure_log

    def frames_table(self) -> pd.DataFrame:
        return frames_to_dataframe(self.frames)

    def summary(self) -> Dict[str, float]:
        return summarize(self.frames_table())


def build_controller(config: ScenarioConfig) -> SignalController:
    if config.controller == ControllerKind.FIXED:
        return FixedTimeController(config.timing)
    if config.controller == ControllerKind.ACTUATED:
        return ActuatedController(config.timing, config.actuated)
    return Dt3pController(config.timing, config.weights)


def tick_count(duration: float, dt: float) -> int:
    return int(math.ceil(duration / dt - _EPS))


def run_experiment(config: ScenarioConfig) -> ExperimentResult:
    """Simulate `config` end to end. Nothing is written to disk."""
    world = build_world(
        config.initial_queues,
        config.arrivals,
        config.duration,
        config.seed,
        layout=config.belts,
        headway=config.saturation_headway,
        message_delay=config.message_delay,
        links=config.links,
    )
    driver = ControllerDriver(build_controller(config))
    recorder = MetricsRecorder()
    lit_history: List[Tuple[float, Tuple[NodeId, ...]]] = []

    logger.info("Running %s with %s for %.0fs (seed %d)", config.name, config.controller.value, config.duration, config.seed)
    next_frame = 1.0
    for _ in range(tick_count(config.duration, config.dt)):
        lit_history.append((world.clock, tuple(driver.lit_greens)))
        step(world, driver, config.dt)
        if world.clock + _EPS >= next_frame:
            recorder.record(world)
            next_frame = math.floor(world.clock + _EPS) + 1.0
    close_green_log(world)

    result = ExperimentResult(
        config=config,
        world=world,
        frames=recorder.frames,
        decisions=driver.decisions,
        transcript=driver.transcript,
        lit_history=lit_history,
    )
    summary = result.summary()
    logger.info(
        "%s on %s: %d decisions, final std %.2f, spread %.0f, utilization %.3f",
        config.controller.value,
        config.name,
        len(result.decisions),
        summary["final_std"],
        summary["spread"],
        summary["utilization"],
    )
    return result


def write_outputs(result: ExperimentResult, out_dir: Path) -> OutputPaths:
    """frames.csv, decisions.log and events.log under `out_dir`; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = result.config.outputs
    frames_path = write_frames_csv(result.frames, out_dir / names.frames)
    decisions_path = out_dir / names.decisions
    events_path = out_dir / names.events
    write_lines(decisions_path, result.decisions)
    write_lines(events_path, result.transcript)
    logger.info("Outputs written to %s", out_dir)
    return OutputPaths(frames=str(frames_path), decisions=str(decisions_path), events=str(events_path))


def replay_events(config: ScenarioConfig, events: Iterable) -> List[DecisionRecord]:
    """Drive a fresh controller from a recorded message stream."""
    driver = ControllerDriver(build_controller(config))
    batch: list = []
    for record in events:
        if isinstance(record, TickMarker):
            driver.dispatch(batch, record.sim_time, record.dt)
            batch = []
        else:
            batch.append(record)
    return driver.decisions


def verify_decisions(replayed: Sequence[DecisionRecord], recorded: Sequence[DecisionRecord]) -> None:
    for index, (ours, theirs) in enumerate(zip(replayed, recorded)):
        if ours != theirs:
            logger.error("Replay diverged at decision %d: %s != %s", index, ours.model_dump(), theirs.model_dump())
            raise ReplayMismatch(f"Decision {index} differs: replayed {ours.model_dump_json()} vs recorded {theirs.model_dump_json()}")
    if len(replayed) != len(recorded):
        logger.error("Replay produced %d decisions, log has %d", len(replayed), len(recorded))
        raise ReplayMismatch(f"Replay produced {len(replayed)} decisions, log has {len(recorded)}")


def replay(config: ScenarioConfig, events_path: Path, decisions_path: Optional[Path] = None) -> List[DecisionRecord]:
    """
    Replay `events_path` under `config`.

    Raises:
        ReplayMismatch: when `decisions_path` is given and the replayed
            decisions differ from it.
    """
    replayed = replay_events(config, read_events(Path(events_path)))
    if decisions_path is not None:
        verify_decisions(replayed, read_decisions(Path(decisions_path)))
        logger.info("Replay of %s matches %s (%d decisions)", events_path, decisions_path, len(replayed))
    return replayed


def compare(
    config: ScenarioConfig,
    out_dir: Optional[Path] = None,
    controllers: Sequence[ControllerKind] = tuple(ControllerKind),
    max_workers: int = MAX_WORKERS,
) -> Tuple[pd.DataFrame, Dict[ControllerKind, ExperimentResult]]:
    """
    Run every controller on the same scenario and seed.

    With `out_dir`, each run's outputs go to `<out_dir>/<controller>/` and the
    summary table to `compare.csv`, green splits per cycle to
    `splits_<controller>.csv`.
    """
    configs = {kind: with_overrides(config, controller=kind) for kind in controllers}
    results: Dict[ControllerKind, ExperimentResult] = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {kind: pool.submit(run_experiment, cfg) for kind, cfg in configs.items()}
        for kind, future in futures.items():
            results[kind] = future.result()

    rows = []
    for kind in controllers:
        summary = results[kind].summary()
        rows.append({"controller": kind.value, "decisions": len(results[kind].decisions), **summary})
    table = pd.DataFrame(rows, columns=["controller", "decisions", "final_std", "spread", "utilization", "mean_queue"])

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for kind in controllers:
            result = results[kind]
            write_outputs(result, out_dir / kind.value.lower())
            splits = green_splits(result.frames_table(), config.timing.full_cycle_time)
            splits.to_csv(out_dir / f"splits_{kind.value.lower()}.csv", index=False, lineterminator="\n")
        table.round(6).to_csv(out_dir / "compare.csv", index=False, lineterminator="\n")
        logger.info("Comparison written to %s", out_dir / "compare.csv")
    return table, results
