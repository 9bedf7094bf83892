"""
The simulated intersection: twelve approach lanes, the RSE bus and the
green/departure bookkeeping, advanced in fixed ticks by `step`.

One tick [t, t + dt):
    1. read which directions are lit (set by the controller last tick)
    2. vehicles enter roads (handshake + Load Adder)
    3. vehicles reach their queues (first-vehicle confirmation)
    4. lit directions discharge at the saturation headway (Load Subtractor)
    5. estimator hand-offs
    6. road-status reports for the eight signalized directions
    7. the bus is drained into the controller driver
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from junctionsim.errors import ContractViolation
from junctionsim.logic.intersection import ALL_DIRECTIONS, DIRECTION_OF, NODE_OF, NODES, SLIP_LANES, NodeId
from junctionsim.messaging.bus import EventBus
from junctionsim.messaging.records import BeltKind, BusRecord, RoadStatusReport
from junctionsim.metrics.utilization import Departure, GreenInterval
from junctionsim.road.arrivals import ArrivalProcess, ScheduledEntry, build_schedule
from junctionsim.road.lanes import (
    BeltLayout,
    LaneState,
    VehicleRecord,
    active_estimator,
    sample_direction_state,
)

logger = logging.getLogger(__name__)

_EPS = 1e-9


class LaneLink(BaseModel):
    """Neighbouring lanes a direction reports on (multi-intersection integration)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    back: List[int] = Field(default_factory=list, description="Back-road lanes feeding this direction")
    downstream: List[int] = Field(default_factory=list, description="Receiving lanes after the stop line")

    @field_validator("back", "downstream")
    @classmethod
    def _known_lanes(cls, lanes: List[int]) -> List[int]:
        for lane in lanes:
            if lane not in ALL_DIRECTIONS:
                raise ValueError(f"unknown direction index {lane}")
        return lanes


class SignalDriver(Protocol):
    @property
    def lit_greens(self) -> Tuple[NodeId, ...]: ...

    def dispatch(self, records: Sequence[BusRecord], now: float, dt: float) -> list: ...


@dataclass
class World:
    lanes: Dict[int, LaneState]
    layout: BeltLayout
    schedule: List[ScheduledEntry]
    bus: EventBus
    free_speed_mps: float = 10.0
    headway: float = 2.0
    links: Dict[int, LaneLink] = field(default_factory=dict)
    clock: float = 0.0
    cursor: int = 0
    next_id: int = 0
    lit: Tuple[NodeId, ...] = ()
    green_since: Dict[NodeId, float] = field(default_factory=dict)
    green_seconds: Dict[NodeId, float] = field(default_factory=lambda: {node: 0.0 for node in NODES})
    green_log: List[GreenInterval] = field(default_factory=list)
    departure_log: List[Departure] = field(default_factory=list)
    slots_total: int = 0
    slots_productive: int = 0

    @property
    def utilization_to_date(self) -> float:
        if self.slots_total == 0:
            return 0.0
        return self.slots_productive / self.slots_total

    def queue_lengths(self) -> Dict[int, int]:
        return {direction: len(lane.queue) for direction, lane in self.lanes.items()}

    def totals(self) -> Tuple[int, int, int]:
        """(arrivals, departures, queued) summed over every lane."""
        arrivals = sum(lane.arrivals_total for lane in self.lanes.values())
        departures = sum(lane.departures_total for lane in self.lanes.values())
        queued = sum(len(lane.queue) for lane in self.lanes.values())
        return arrivals, departures, queued


def build_world(
    initial_queues: Mapping[int, int],
    arrivals: ArrivalProcess,
    duration: float,
    seed: int,
    layout: Optional[BeltLayout] = None,
    headway: float = 2.0,
    message_delay: float = 0.0,
    links: Optional[Mapping[int, LaneLink]] = None,
) -> World:
    """Lanes seeded with their initial queues at t=0 and the full arrival schedule drawn from `seed`."""
    layout = layout or BeltLayout()
    lanes = {direction: LaneState(direction=direction, road_length_m=layout.road_length_m) for direction in ALL_DIRECTIONS}
    world = World(
        lanes=lanes,
        layout=layout,
        schedule=build_schedule(arrivals, duration, seed),
        bus=EventBus(delay=message_delay),
        free_speed_mps=arrivals.free_speed_mps,
        headway=headway,
        links=dict(links or {}),
    )
    for direction in ALL_DIRECTIONS:
        count = initial_queues.get(direction, 0)
        if count and direction in SLIP_LANES:
            raise ContractViolation(f"Slip lane {direction} cannot hold a queue")
        lane = lanes[direction]
        for _ in range(count):
            lane.seed_queue(VehicleRecord(id=world.next_id), joined_at=0.0)
            world.next_id += 1
        lane.estimator = active_estimator(len(lane.queue), layout)
    return world


def _update_green_log(world: World, lit: Tuple[NodeId, ...], at: float) -> None:
    for node in world.lit:
        if node not in lit:
            world.green_log.append(GreenInterval(node, world.green_since.pop(node), at))
    for node in lit:
        if node not in world.lit:
            world.green_since[node] = at
            world.lanes[DIRECTION_OF[node]].green_credit = 0.0
    world.lit = tuple(lit)


def close_green_log(world: World) -> List[GreenInterval]:
    """Close intervals still open at the current clock (end of run)."""
    _update_green_log(world, (), world.clock)
    return world.green_log


def _enter(world: World, entry: ScheduledEntry) -> None:
    vehicle = VehicleRecord(
        id=world.next_id,
        kind=entry.kind,
        priority=entry.priority,
        on_duty=entry.on_duty,
        entered_at=entry.time,
    )
    world.next_id += 1
    world.bus.handshake(vehicle, entry.direction, entry.time)
    lane = world.lanes[entry.direction]
    if entry.direction in SLIP_LANES:
        lane.sink(vehicle)
        world.bus.release(vehicle.id, entry.direction)
        return
    travel = max(0.0, entry.distance_m - world.layout.fva_offset_m) / world.free_speed_mps
    lane.enter(vehicle, entry.time + travel)
    world.bus.belt_event(BeltKind.LOAD_ADDER, entry.direction, lane.entered_total, entry.time, vehicle_id=vehicle.id)
    if vehicle.on_duty:
        logger.debug("On-duty %s %s will reach the queue on %s at %.1fs", vehicle.kind.value, vehicle.id, entry.direction, entry.time + travel)


def _discharge(world: World, node: NodeId, dt: float, now: float) -> None:
    direction = DIRECTION_OF[node]
    lane = world.lanes[direction]
    lane.green_credit += dt / world.headway
    while lane.green_credit >= 1.0 - _EPS:
        lane.green_credit -= 1.0
        world.slots_total += 1
        if not lane.queue:
            continue
        vehicle = lane.discharge()
        world.slots_productive += 1
        world.departure_log.append(Departure(node, now, vehicle.id))
        world.bus.belt_event(BeltKind.LOAD_SUBTRACTOR, direction, lane.departures_total, now, vehicle_id=vehicle.id)
    world.green_seconds[node] += dt


def _link_counts(world: World, direction: int) -> Tuple[int, int]:
    link = world.links.get(direction)
    if link is None:
        return 0, 0
    v_nqb = sum(len(world.lanes[lane].queue) for lane in link.back)
    v_tnn = sum(len(world.lanes[lane].queue) for lane in link.downstream)
    return v_nqb, v_tnn


def publish_road_status(world: World) -> None:
    for node in NODES:
        direction = DIRECTION_OF[node]
        v_nqb, v_tnn = _link_counts(world, direction)
        state = sample_direction_state(world.lanes[direction], world.clock, world.layout, v_nqb, v_tnn)
        world.bus.publish(RoadStatusReport(direction=direction, state=state, timestamp=world.clock))


def step(world: World, driver: SignalDriver, dt: float) -> World:
    """Advance the world by one tick and hand the tick's messages to the controller."""
    if dt <= 0:
        raise ContractViolation("dt must be positive")
    start, end = world.clock, world.clock + dt
    lit = tuple(driver.lit_greens)
    _update_green_log(world, lit, start)

    while world.cursor < len(world.schedule) and world.schedule[world.cursor].time < end - _EPS:
        _enter(world, world.schedule[world.cursor])
        world.cursor += 1

    for direction in NODE_OF:
        lane = world.lanes[direction]
        was_empty = not lane.queue
        joined = lane.admit_due(end - _EPS)
        if joined and was_empty:
            join_at, first = joined[0]
            world.bus.belt_event(BeltKind.FVA_CONFIRM, direction, 1, join_at, vehicle_id=first.id)

    for node in lit:
        _discharge(world, node, dt, end)

    for direction in NODE_OF:
        lane = world.lanes[direction]
        index = active_estimator(len(lane.queue), world.layout)
        if index != lane.estimator:
            lane.estimator = index
            world.bus.belt_event(BeltKind.LOAD_ESTIMATOR, direction, len(lane.queue), end, estimator=index)

    world.clock = end
    publish_road_status(world)
    driver.dispatch(world.bus.drain(end), end, dt)
    return world
