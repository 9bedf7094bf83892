"""
Scenario configuration: the YAML schema, its validation, and lookup of
scenario files by path or by name.

Lookup order for a name: an existing file path, then
$JUNCTIONSIM_SCENARIO_DIR/<name>.yaml, then the built-in scenarios shipped in
junctionsim/data/scenarios.
"""
import logging
import os
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from junctionsim.core.baselines import ActuatedConfig
from junctionsim.errors import ScenarioError
from junctionsim.logic.intersection import NODE_OF
from junctionsim.logic.loads import LoadCaps, LoadWeights
from junctionsim.logic.planner import TimingConfig
from junctionsim.road.arrivals import ArrivalProcess
from junctionsim.road.lanes import BeltLayout
from junctionsim.road.world import LaneLink

logger = logging.getLogger(__name__)

BUILTIN_SCENARIO_DIR = Path(__file__).resolve().parent.parent / "data" / "scenarios"

_CYCLES = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*-?\s*cycles?\s*$", re.IGNORECASE)
_UNITS = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(h|m|s)?\s*$", re.IGNORECASE)
_UNIT_SECONDS = {"h": 3600.0, "m": 60.0, "s": 1.0}


class ControllerKind(str, Enum):
    DT3P = "DT3P"
    FIXED = "FIXED"
    ACTUATED = "ACTUATED"


class OutputPaths(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    frames: str = "frames.csv"
    decisions: str = "decisions.log"
    events: str = "events.log"


def parse_duration(value: Union[float, int, str], full_cycle_time: float = 120.0) -> float:
    """
    Seconds from a number, "N-cycles" (N full cycles), or "N[h|m|s]".

    Raises:
        ValueError: for anything else or a non-positive result.
    """
    if isinstance(value, bool):
        raise ValueError(f"invalid duration {value!r}")
    if isinstance(value, (int, float)):
        seconds = float(value)
    else:
        cycles = _CYCLES.match(value)
        units = _UNITS.match(value)
        if cycles:
            seconds = float(cycles.group(1)) * full_cycle_time
        elif units:
            seconds = float(units.group(1)) * _UNIT_SECONDS[(units.group(2) or "s").lower()]
        else:
            raise ValueError(f"invalid duration {value!r}; use seconds, '4-cycles' or '1h'")
    if seconds <= 0:
        raise ValueError("duration must be positive")
    return seconds


class ScenarioConfig(BaseModel):
    """One experiment: intersection state at t=0, demand, controller and constants."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "custom"
    controller: ControllerKind = ControllerKind.DT3P
    duration: float = Field(default=3600.0, gt=0, description="Simulated seconds")
    dt: float = Field(default=1.0, gt=0, description="Tick length in seconds")
    seed: int = 0
    initial_queues: Dict[int, int] = Field(default_factory=dict)
    timing: TimingConfig = Field(default_factory=TimingConfig)
    actuated: ActuatedConfig = Field(default_factory=ActuatedConfig)
    weights: LoadWeights = Field(default_factory=LoadWeights)
    caps: LoadCaps = Field(default_factory=LoadCaps)
    belts: BeltLayout = Field(default_factory=BeltLayout)
    arrivals: ArrivalProcess = Field(default_factory=ArrivalProcess)
    saturation_headway: float = Field(default=2.0, gt=0, description="Seconds per vehicle at the stop line")
    message_delay: float = Field(default=0.0, ge=0)
    links: Dict[int, LaneLink] = Field(default_factory=dict)
    outputs: OutputPaths = Field(default_factory=OutputPaths)

    @model_validator(mode="before")
    @classmethod
    def _defaults_and_duration(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if data.get("controller") is None:
            logger.warning("Scenario %r has no controller; defaulting to DT3P", data.get("name", "custom"))
            data["controller"] = ControllerKind.DT3P.value
        duration = data.get("duration")
        if isinstance(duration, str):
            timing = data.get("timing") or {}
            full_cycle = timing.get("full_cycle_time", 120.0) if isinstance(timing, dict) else timing.full_cycle_time
            data["duration"] = parse_duration(duration, full_cycle)
        return data

    @field_validator("initial_queues")
    @classmethod
    def _check_queues(cls, queues: Dict[int, int]) -> Dict[int, int]:
        for direction, count in queues.items():
            if direction not in NODE_OF:
                raise ValueError(f"direction {direction} is not signalized")
            if count < 0:
                raise ValueError(f"initial queue on direction {direction} must be >= 0")
        return dict(sorted(queues.items()))

    @field_validator("links")
    @classmethod
    def _check_links(cls, links: Dict[int, LaneLink]) -> Dict[int, LaneLink]:
        for direction in links:
            if direction not in NODE_OF:
                raise ValueError(f"direction {direction} is not signalized")
        return links

    @model_validator(mode="after")
    def _check_consistency(self) -> "ScenarioConfig":
        self.weights.check_dominance(self.caps)
        if self.actuated.max_green < self.timing.min_green:
            raise ValueError("actuated.max_green must be >= timing.min_green")
        return self


def _error_lines(exc: ValidationError) -> list:
    lines = []
    for err in exc.errors():
        path = ".".join(str(part) for part in err.get("loc", ())) or "<root>"
        lines.append(f"{path}: {err.get('msg', '')}")
    return lines


def validate_scenario(data: Dict[str, Any], source: str = "<dict>") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        lines = _error_lines(exc)
        for line in lines:
            logger.error("%s: %s", source, line)
        raise ScenarioError(f"Invalid scenario {source}", lines) from None


def resolve_scenario_path(name_or_path: Union[str, Path]) -> Path:
    candidate = Path(name_or_path)
    if candidate.is_file():
        return candidate
    stem = candidate.stem if candidate.suffix in (".yaml", ".yml") else str(name_or_path)
    search = []
    env_dir = os.getenv("JUNCTIONSIM_SCENARIO_DIR")
    if env_dir:
        search.append(Path(env_dir))
    search.append(BUILTIN_SCENARIO_DIR)
    for directory in search:
        for suffix in (".yaml", ".yml"):
            path = directory / f"{stem}{suffix}"
            if path.is_file():
                return path
    raise ScenarioError(f"Scenario {name_or_path!r} not found", [f"searched: {', '.join(str(d) for d in search)}"])


def load_scenario(name_or_path: Union[str, Path]) -> ScenarioConfig:
    """
    Load and validate a scenario by file path or name.

    Raises:
        ScenarioError: file missing, not YAML, not a mapping, or failing
            validation (one "key.path: message" line per problem).
    """
    path = resolve_scenario_path(name_or_path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"Scenario {path} is not valid YAML", [str(exc)]) from None
    if not isinstance(data, dict):
        raise ScenarioError(f"Scenario {path} must be a mapping at the top level")
    config = validate_scenario(data, str(path))
    logger.info("Loaded scenario %s (%s, %.0fs, seed %d)", config.name, config.controller.value, config.duration, config.seed)
    return config


def with_overrides(
    config: ScenarioConfig,
    controller: Optional[Union[ControllerKind, str]] = None,
    duration: Optional[Union[float, str]] = None,
    seed: Optional[int] = None,
) -> ScenarioConfig:
    """Copy of `config` with CLI/API overrides applied and re-validated."""
    data = config.model_dump(mode="json")
    if controller is not None:
        kind = controller if isinstance(controller, ControllerKind) else ControllerKind(controller.upper())
        data["controller"] = kind.value
    if duration is not None:
        data["duration"] = duration
    if seed is not None:
        data["seed"] = seed
    return validate_scenario(data, config.name)
