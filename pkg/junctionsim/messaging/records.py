"""
Wire records exchanged between vehicles, belts, the RSE and the traffic light
controller, and their line-delimited JSON codec.

Every record starts with a `record_type` tag; the remaining fields are written
in the order they are declared here, so logs are byte-stable.
"""
from enum import Enum
from pathlib import Path
from typing import Annotated, Iterable, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from junctionsim.logic.loads import DirectionState
from junctionsim.road.lanes import VehicleKind


class VehicleReport(BaseModel):
    """What a vehicle tells the RSE once the handshake completes at road entry."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["vehicle_report"] = "vehicle_report"
    vehicle_id: int
    kind: VehicleKind
    priority: int = Field(ge=0)
    on_duty: int = Field(ge=0, le=1)
    direction: int
    timestamp: float

    @property
    def emergency(self) -> bool:
        return self.on_duty == 1


class BeltKind(str, Enum):
    LOAD_ADDER = "LOAD_ADDER"
    LOAD_SUBTRACTOR = "LOAD_SUBTRACTOR"
    FVA_CONFIRM = "FVA_CONFIRM"
    LOAD_ESTIMATOR = "LOAD_ESTIMATOR"


class BeltEvent(BaseModel):
    """A belt trigger relayed by the RSE."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["belt_event"] = "belt_event"
    belt_kind: BeltKind
    direction: int
    payload: int = Field(description="Count for adder/subtractor/confirmation, queue length for estimators")
    timestamp: float
    vehicle_id: Optional[int] = None
    estimator: Optional[int] = Field(default=None, description="Active estimator index (LOAD_ESTIMATOR only)")
    seq: int = 0


class RoadStatusReport(BaseModel):
    """One direction's eight variables, sent RSE -> TLC every sampling tick."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["road_status"] = "road_status"
    direction: int
    state: DirectionState
    timestamp: float


class TickMarker(BaseModel):
    """Closes the batch of records dispatched to the controller at `sim_time`."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["tick"] = "tick"
    sim_time: float
    dt: float


class DecisionRecord(BaseModel):
    """One line of decisions.log."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["decision"] = "decision"
    sim_time: float
    reason: str
    pair: str
    green_seconds: float
    mode: str


BusRecord = Union[VehicleReport, BeltEvent, RoadStatusReport]
EventRecord = Annotated[
    Union[VehicleReport, BeltEvent, RoadStatusReport, TickMarker],
    Field(discriminator="record_type"),
]
_EVENT_ADAPTER: TypeAdapter = TypeAdapter(EventRecord)


def dump_line(record: BaseModel) -> str:
    return record.model_dump_json()


def parse_event_line(line: str):
    return _EVENT_ADAPTER.validate_json(line)


def write_lines(path: Path, records: Iterable[BaseModel]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(dump_line(record))
            handle.write("\n")


def read_events(path: Path) -> List:
    with open(path, "r", encoding="utf-8") as handle:
        return [parse_event_line(line) for line in handle if line.strip()]


def read_decisions(path: Path) -> List[DecisionRecord]:
    with open(path, "r", encoding="utf-8") as handle:
        return [DecisionRecord.model_validate_json(line) for line in handle if line.strip()]
