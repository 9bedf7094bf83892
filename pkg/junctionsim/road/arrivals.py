"""
Arrival processes: memoryless random arrivals per direction plus scripted
vehicles and emergency events for exact replays.

The whole schedule is drawn once, up front, from the scenario seed, so two
controllers run on the same seed see exactly the same traffic.
"""
from typing import Dict, List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from junctionsim.logic.intersection import ALL_DIRECTIONS
from junctionsim.road.lanes import DEFAULT_PRIORITY, VehicleKind


def _check_direction(direction: int) -> int:
    if direction not in ALL_DIRECTIONS:
        raise ValueError(f"unknown direction index {direction}")
    return direction


class ScriptedVehicle(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    time: float = Field(..., ge=0)
    direction: int
    kind: VehicleKind = VehicleKind.CAR
    on_duty: int = Field(default=0, ge=0, le=1)
    distance_m: Optional[float] = Field(default=None, ge=0)

    @field_validator("direction")
    @classmethod
    def _known_direction(cls, direction: int) -> int:
        return _check_direction(direction)


class EmergencyEvent(BaseModel):
    """An on-duty special vehicle entering a road."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    time: float = Field(..., ge=0)
    direction: int
    kind: VehicleKind = VehicleKind.AMBULANCE
    distance_m: Optional[float] = Field(default=None, ge=0)

    @field_validator("direction")
    @classmethod
    def _known_direction(cls, direction: int) -> int:
        return _check_direction(direction)

    @field_validator("kind")
    @classmethod
    def _not_a_car(cls, kind: VehicleKind) -> VehicleKind:
        if kind == VehicleKind.CAR:
            raise ValueError("emergency events need a special vehicle kind")
        return kind


class ArrivalProcess(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    rates: Dict[int, float] = Field(default_factory=dict, description="Vehicles per second by direction index")
    default_rate: float = Field(default=0.1, ge=0, description="Rate for signalized directions not listed in `rates`")
    entry_distance_m: float = Field(default=0.0, ge=0, description="Where random arrivals enter, metres from the stop line")
    free_speed_mps: float = Field(default=10.0, gt=0)
    scripted: List[ScriptedVehicle] = Field(default_factory=list)
    emergency_events: List[EmergencyEvent] = Field(default_factory=list)

    @field_validator("rates")
    @classmethod
    def _check_rates(cls, rates: Dict[int, float]) -> Dict[int, float]:
        for direction, rate in rates.items():
            _check_direction(direction)
            if rate < 0:
                raise ValueError(f"rate for direction {direction} must be >= 0")
        return rates

    @field_validator("scripted")
    @classmethod
    def _check_scripted_order(cls, scripted: List[ScriptedVehicle]) -> List[ScriptedVehicle]:
        times = [vehicle.time for vehicle in scripted]
        if times != sorted(times):
            raise ValueError("scripted arrival times must be nondecreasing")
        return scripted

    def rate_for(self, direction: int) -> float:
        if direction in self.rates:
            return self.rates[direction]
        # slip lanes only carry traffic when listed explicitly
        return self.default_rate if direction % 3 != 0 else 0.0


class ScheduledEntry(NamedTuple):
    time: float
    direction: int
    order: int
    kind: VehicleKind
    priority: int
    on_duty: int
    distance_m: float


def build_schedule(process: ArrivalProcess, duration: float, seed: int) -> List[ScheduledEntry]:
    """
    Every road entry in [0, duration), sorted by (time, direction, order).

    Random arrivals use exponential gaps from one child generator per
    direction so adding traffic on one road never reshuffles another.
    """
    entries: List[ScheduledEntry] = []
    children = np.random.SeedSequence(seed).spawn(len(ALL_DIRECTIONS))
    order = 0
    for direction, child in zip(ALL_DIRECTIONS, children):
        rate = process.rate_for(direction)
        if rate <= 0:
            continue
        rng = np.random.default_rng(child)
        t = float(rng.exponential(1.0 / rate))
        while t < duration:
            entries.append(
                ScheduledEntry(t, direction, order, VehicleKind.CAR, 0, 0, process.entry_distance_m)
            )
            order += 1
            t += float(rng.exponential(1.0 / rate))

    for vehicle in process.scripted:
        if vehicle.time >= duration:
            continue
        priority = DEFAULT_PRIORITY[vehicle.kind]
        entries.append(
            ScheduledEntry(
                vehicle.time,
                vehicle.direction,
                order,
                vehicle.kind,
                priority,
                vehicle.on_duty if vehicle.kind != VehicleKind.CAR else 0,
                process.entry_distance_m if vehicle.distance_m is None else vehicle.distance_m,
            )
        )
        order += 1

    for event in process.emergency_events:
        if event.time >= duration:
            continue
        entries.append(
            ScheduledEntry(
                event.time,
                event.direction,
                order,
                event.kind,
                DEFAULT_PRIORITY[event.kind],
                1,
                process.entry_distance_m if event.distance_m is None else event.distance_m,
            )
        )
        order += 1

    entries.sort(key=lambda entry: (entry.time, entry.direction, entry.order))
    return entries
