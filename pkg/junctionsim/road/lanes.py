"""
Lanes, vehicles and the sensor belts laid along each road.

Belt layout per lane, from the road entrance to the stop line:
    Load Adder (entrance)  ->  Load Estimators every 150 m  ->
    first-vehicle confirmation belt (6 m before the stop line)  ->  Load Subtractor (stop line)

Queues are vertical: a vehicle joins the queue when it crosses the
confirmation belt and leaves it when the Load Subtractor sees it cross the
stop line.
"""
import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from junctionsim.logic.loads import DirectionState

# Vehicle physical length in metres
VEHICLE_LENGTH_M = 5.0
ESTIMATOR_SPACING_M = 150.0


class VehicleKind(str, Enum):
    CAR = "CAR"
    AMBULANCE = "AMBULANCE"
    FIRE = "FIRE"
    POLICE = "POLICE"


DEFAULT_PRIORITY: Dict[VehicleKind, int] = {
    VehicleKind.CAR: 0,
    VehicleKind.POLICE: 2,
    VehicleKind.FIRE: 3,
    VehicleKind.AMBULANCE: 3,
}


class VehicleRecord(BaseModel):
    """A simulated vehicle as the RSE learns about it at road entry."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    kind: VehicleKind = VehicleKind.CAR
    priority: int = Field(default=0, ge=0)
    on_duty: int = Field(default=0, ge=0, le=1, description="0 = idle, 1 = on duty")
    entered_at: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "VehicleRecord":
        if self.kind == VehicleKind.CAR and (self.on_duty or self.priority):
            raise ValueError("a CAR has no priority class and is never on duty")
        if self.on_duty and self.priority <= 0:
            raise ValueError("an on-duty special vehicle must carry a priority class")
        return self


class BeltLayout(BaseModel):
    """Where the belts sit on each road."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    estimator_spacing_m: float = Field(default=ESTIMATOR_SPACING_M, gt=0)
    fva_offset_m: float = Field(default=6.0, ge=0, description="Confirmation belt distance before the stop line")
    segment_capacity: int = Field(
        default=int(ESTIMATOR_SPACING_M // VEHICLE_LENGTH_M),
        gt=0,
        description="Vehicles one estimator segment holds",
    )
    road_length_m: float = Field(default=1000.0, gt=0)

    @property
    def n_estimators(self) -> int:
        return max(1, int(self.road_length_m // self.estimator_spacing_m))


def active_estimator(queue_len: int, layout: BeltLayout) -> int:
    """Index (1-based) of the one Load Estimator watching the queue tail."""
    if queue_len < 0:
        raise ValueError("queue length cannot be negative")
    return min(1 + queue_len // layout.segment_capacity, layout.n_estimators)


@dataclass
class LaneState:
    """One approach lane: vehicles in transit to the queue, the queue itself, and belt counters."""

    direction: int
    road_length_m: float = 1000.0
    queue: Deque[VehicleRecord] = field(default_factory=deque)
    join_times: Dict[int, float] = field(default_factory=dict)
    in_transit: List[Tuple[float, int, VehicleRecord]] = field(default_factory=list)
    entered_total: int = 0
    arrivals_total: int = 0
    departures_total: int = 0
    green_credit: float = 0.0
    estimator: int = 1

    @property
    def first_arrival_time(self) -> Optional[float]:
        if not self.queue:
            return None
        return self.join_times[self.queue[0].id]

    def enter(self, vehicle: VehicleRecord, join_at: float) -> None:
        """Load Adder: the vehicle is on the road and will reach the queue at `join_at`."""
        self.entered_total += 1
        heapq.heappush(self.in_transit, (join_at, vehicle.id, vehicle))

    def seed_queue(self, vehicle: VehicleRecord, joined_at: float) -> None:
        """Place an already-queued vehicle (initial conditions)."""
        self.entered_total += 1
        self.arrivals_total += 1
        self.queue.append(vehicle)
        self.join_times[vehicle.id] = joined_at

    def admit_due(self, before: float) -> List[Tuple[float, VehicleRecord]]:
        """Move vehicles whose join time is earlier than `before` into the queue."""
        joined = []
        while self.in_transit and self.in_transit[0][0] < before:
            join_at, _, vehicle = heapq.heappop(self.in_transit)
            self.queue.append(vehicle)
            self.join_times[vehicle.id] = join_at
            self.arrivals_total += 1
            joined.append((join_at, vehicle))
        return joined

    def discharge(self) -> VehicleRecord:
        """Front vehicle crosses the stop line (FIFO)."""
        vehicle = self.queue.popleft()
        del self.join_times[vehicle.id]
        self.departures_total += 1
        return vehicle

    def sink(self, vehicle: VehicleRecord) -> None:
        """Unsignalized slip lane: the vehicle passes straight through."""
        self.entered_total += 1
        self.arrivals_total += 1
        self.departures_total += 1

    def special_vehicle(self) -> Optional[VehicleRecord]:
        """Front-most on-duty vehicle, queued vehicles first, then those still approaching."""
        for vehicle in self.queue:
            if vehicle.on_duty:
                return vehicle
        for _, _, vehicle in sorted(self.in_transit):
            if vehicle.on_duty:
                return vehicle
        return None


def sample_direction_state(
    lane: LaneState,
    now: float,
    layout: BeltLayout = BeltLayout(),
    v_nqb: int = 0,
    v_tnn: int = 0,
) -> DirectionState:
    """Assemble the eight variables the RSE reports for one lane at `now`."""
    v_c = len(lane.queue)
    first = lane.first_arrival_time
    special = lane.special_vehicle()
    return DirectionState(
        v_c=v_c,
        c_fva=1 if v_c > 0 else 0,
        v_c_pct=min(1.0, v_c / layout.segment_capacity),
        l_w=max(0.0, now - first) if first is not None else 0.0,
        l_p=special.priority if special else 0,
        l_d=special.on_duty if special else 0,
        v_nqb=v_nqb,
        v_tnn=v_tnn,
    )
