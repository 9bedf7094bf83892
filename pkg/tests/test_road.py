"""
Road simulation: belts, sampling, arrival schedules and the world step.
"""
import pytest
from pydantic import ValidationError

from junctionsim.logic.intersection import DIRECTION_OF, NODES, NodeId
from junctionsim.logic.loads import DirectionState
from junctionsim.messaging.records import BeltEvent, BeltKind, RoadStatusReport, VehicleReport
from junctionsim.road.arrivals import ArrivalProcess, EmergencyEvent, ScriptedVehicle, build_schedule
from junctionsim.road.lanes import (
    VEHICLE_LENGTH_M,
    BeltLayout,
    LaneState,
    VehicleKind,
    VehicleRecord,
    active_estimator,
    sample_direction_state,
)
from junctionsim.road.world import LaneLink, build_world, close_green_log, step

A, B, C, D, E, F, G, H = NODES
NO_TRAFFIC = ArrivalProcess(default_rate=0.0)


class StubDriver:
    """Holds the lights fixed and keeps whatever the bus hands over."""

    def __init__(self, lit=()):
        self.lit_greens = tuple(lit)
        self.batches = []

    def dispatch(self, records, now, dt):
        self.batches.append((now, list(records)))
        return []


def _queued_lane(count, direction=4, joined_at=0.0):
    lane = LaneState(direction=direction)
    for vehicle_id in range(count):
        lane.seed_queue(VehicleRecord(id=vehicle_id), joined_at=joined_at)
    return lane


def test_active_estimator():
    layout = BeltLayout()
    assert active_estimator(29, layout) == 1
    assert active_estimator(31, layout) == 2
    assert active_estimator(0, layout) == 1
    assert active_estimator(10_000, layout) == layout.n_estimators == 6
    with pytest.raises(ValueError):
        active_estimator(-1, layout)


def test_segment_capacity_follows_vehicle_length():
    layout = BeltLayout()
    assert layout.segment_capacity == layout.estimator_spacing_m / VEHICLE_LENGTH_M == 30


def test_empty_lane_samples_all_zero():
    assert sample_direction_state(LaneState(direction=4), now=12.0) == DirectionState()


def test_sample_of_long_queue():
    state = sample_direction_state(_queued_lane(100), now=60.0)
    assert (state.v_c, state.c_fva, state.v_c_pct, state.l_w, state.l_d) == (100, 1, 1.0, 60.0, 0)


def test_on_duty_vehicle_anywhere_surfaces():
    lane = _queued_lane(5)
    ambulance = VehicleRecord(id=99, kind=VehicleKind.AMBULANCE, priority=3, on_duty=1)
    lane.seed_queue(ambulance, joined_at=1.0)
    state = sample_direction_state(lane, now=2.0)
    assert (state.l_p, state.l_d) == (3, 1)

    approaching = LaneState(direction=7)
    approaching.enter(ambulance, join_at=30.0)
    state = sample_direction_state(approaching, now=10.0)
    assert (state.v_c, state.l_p, state.l_d) == (0, 3, 1)


def test_vehicle_record_rules():
    with pytest.raises(ValidationError):
        VehicleRecord(id=1, kind=VehicleKind.CAR, on_duty=1)
    with pytest.raises(ValidationError):
        VehicleRecord(id=1, kind=VehicleKind.CAR, priority=2)
    with pytest.raises(ValidationError):
        VehicleRecord(id=1, kind=VehicleKind.FIRE, on_duty=1, priority=0)
    VehicleRecord(id=1, kind=VehicleKind.FIRE, on_duty=0, priority=3)


def test_fifo_discharge():
    lane = _queued_lane(3)
    assert [lane.discharge().id for _ in range(3)] == [0, 1, 2]
    assert lane.arrivals_total - lane.departures_total == len(lane.queue) == 0
    assert lane.first_arrival_time is None


def test_schedule_is_seeded():
    process = ArrivalProcess(default_rate=0.2)
    first = build_schedule(process, 600, seed=11)
    assert first == build_schedule(process, 600, seed=11)
    assert first != build_schedule(process, 600, seed=12)
    assert all(0 <= entry.time < 600 for entry in first)
    assert [(e.time, e.direction, e.order) for e in first] == sorted((e.time, e.direction, e.order) for e in first)


def test_slip_lanes_carry_traffic_only_when_listed():
    schedule = build_schedule(ArrivalProcess(default_rate=0.5), 300, seed=1)
    assert {entry.direction for entry in schedule}.isdisjoint({3, 6, 9, 12})
    listed = build_schedule(ArrivalProcess(default_rate=0.0, rates={3: 0.5}), 300, seed=1)
    assert listed and {entry.direction for entry in listed} == {3}


def test_extra_demand_elsewhere_leaves_a_direction_untouched():
    base = build_schedule(ArrivalProcess(default_rate=0.0, rates={4: 0.1}), 900, seed=5)
    more = build_schedule(ArrivalProcess(default_rate=0.0, rates={4: 0.1, 7: 0.3}), 900, seed=5)
    assert [e.time for e in base] == [e.time for e in more if e.direction == 4]


def test_arrival_process_validation():
    with pytest.raises(ValidationError):
        ArrivalProcess(rates={13: 0.1})
    with pytest.raises(ValidationError):
        ArrivalProcess(rates={4: -0.1})
    with pytest.raises(ValidationError):
        ArrivalProcess(scripted=[ScriptedVehicle(time=5, direction=4), ScriptedVehicle(time=2, direction=4)])
    with pytest.raises(ValidationError):
        EmergencyEvent(time=1, direction=7, kind=VehicleKind.CAR)


def test_emergency_events_are_scheduled_on_duty():
    process = ArrivalProcess(default_rate=0.0, emergency_events=[EmergencyEvent(time=10, direction=7, distance_m=200)])
    (entry,) = build_schedule(process, 60, seed=0)
    assert (entry.kind, entry.on_duty, entry.priority, entry.distance_m) == (VehicleKind.AMBULANCE, 1, 3, 200)


def test_all_red_with_no_traffic_only_moves_the_clock():
    world = build_world({4: 5, 7: 3}, NO_TRAFFIC, 60, seed=0)
    before = world.queue_lengths()
    driver = StubDriver()
    for _ in range(10):
        step(world, driver, 1.0)
    assert world.clock == 10.0
    assert world.queue_lengths() == before
    assert world.departure_log == []


def test_twenty_seconds_of_green_discharge_ten_vehicles():
    world = build_world({4: 100}, NO_TRAFFIC, 60, seed=0)
    driver = StubDriver(lit=(C,))
    for _ in range(20):
        step(world, driver, 1.0)
    assert len(world.lanes[4].queue) == 90
    assert [d.vehicle_id for d in world.departure_log] == list(range(10))
    assert [d.time for d in world.departure_log] == [2.0 * k for k in range(1, 11)]
    assert world.slots_total == world.slots_productive == 10


def test_green_interval_is_logged_on_close():
    world = build_world({4: 4}, NO_TRAFFIC, 60, seed=0)
    driver = StubDriver(lit=(C,))
    for _ in range(12):
        step(world, driver, 1.0)
    (interval,) = close_green_log(world)
    assert (interval.node, interval.start, interval.end) == (C, 0.0, 12.0)
    assert world.green_seconds[C] == 12.0
    assert world.slots_total == 6
    assert world.slots_productive == 4


def test_conservation_every_tick():
    world = build_world({1: 3, 4: 20, 8: 7}, ArrivalProcess(default_rate=0.3, rates={6: 0.2}), 400, seed=9)
    driver = StubDriver()
    phases = [(A, B), (C, D), (E, F), (G, H)]
    for tick in range(400):
        driver.lit_greens = phases[(tick // 25) % 4]
        step(world, driver, 1.0)
        arrivals, departures, queued = world.totals()
        assert arrivals - departures == queued
        for lane in world.lanes.values():
            assert lane.arrivals_total - lane.departures_total == len(lane.queue)
            assert lane.entered_total - lane.arrivals_total == len(lane.in_transit)
    assert world.lanes[6].departures_total > 0
    assert len(world.lanes[6].queue) == 0


def test_bus_forgets_vehicles_that_left_their_road():
    world = build_world({}, ArrivalProcess(default_rate=0.3, rates={6: 0.2}), 300, seed=4)
    driver = StubDriver()
    phases = [(A, B), (C, D), (E, F), (G, H)]
    for tick in range(300):
        driver.lit_greens = phases[(tick // 20) % 4]
        step(world, driver, 1.0)
        on_road = sum(len(lane.queue) + len(lane.in_transit) for lane in world.lanes.values())
        assert world.bus.tracked == on_road
    assert world.lanes[6].departures_total > 0


def test_every_tick_delivers_eight_road_status_reports():
    world = build_world({}, NO_TRAFFIC, 10, seed=0)
    driver = StubDriver()
    step(world, driver, 1.0)
    (now, records), = driver.batches
    reports = [r for r in records if isinstance(r, RoadStatusReport)]
    assert now == 1.0
    assert sorted(r.direction for r in reports) == [1, 2, 4, 5, 7, 8, 10, 11]
    assert all(r.timestamp == 1.0 for r in reports)


def test_belts_fire_on_entry_confirmation_and_estimator_handoff():
    scripted = [ScriptedVehicle(time=0.5, direction=4, distance_m=106)]
    world = build_world({5: 30}, ArrivalProcess(default_rate=0.0, scripted=scripted), 60, seed=0)
    driver = StubDriver()
    for _ in range(12):
        step(world, driver, 1.0)
    events = [r for _, batch in driver.batches for r in batch if isinstance(r, BeltEvent)]
    kinds = [(e.belt_kind, e.direction) for e in events]
    assert (BeltKind.LOAD_ADDER, 4) in kinds
    # 100 m at 10 m/s: joins the empty queue at 10.5 s
    confirm = next(e for e in events if e.belt_kind == BeltKind.FVA_CONFIRM)
    assert (confirm.direction, confirm.timestamp) == (4, 10.5)
    reports = [r for _, batch in driver.batches for r in batch if isinstance(r, VehicleReport)]
    assert [(r.direction, r.timestamp) for r in reports] == [(4, 0.5)]

    # direction 5 starts with 30 queued: discharging one hands the tail back to estimator 1
    world = build_world({5: 30}, NO_TRAFFIC, 60, seed=0)
    driver = StubDriver(lit=(D,))
    assert world.lanes[5].estimator == 2
    for _ in range(2):
        step(world, driver, 1.0)
    events = [r for _, batch in driver.batches for r in batch if isinstance(r, BeltEvent)]
    handoff = next(e for e in events if e.belt_kind == BeltKind.LOAD_ESTIMATOR)
    assert (handoff.direction, handoff.payload, handoff.estimator) == (5, 29, 1)
    subtractor = next(e for e in events if e.belt_kind == BeltKind.LOAD_SUBTRACTOR)
    assert (subtractor.vehicle_id, subtractor.payload) == (0, 1)


def test_linked_lanes_feed_back_and_downstream_counts():
    links = {4: LaneLink(back=[1], downstream=[7, 8])}
    world = build_world({1: 6, 7: 2, 8: 3}, NO_TRAFFIC, 10, seed=0, links=links)
    driver = StubDriver()
    step(world, driver, 1.0)
    (_, records), = driver.batches
    state = next(r.state for r in records if isinstance(r, RoadStatusReport) and r.direction == 4)
    assert (state.v_nqb, state.v_tnn) == (6, 5)
    with pytest.raises(ValidationError):
        LaneLink(back=[13])


def test_seeded_initial_queues_get_ids_in_direction_order():
    world = build_world({4: 2, 1: 1}, NO_TRAFFIC, 10, seed=0)
    assert [v.id for v in world.lanes[1].queue] == [0]
    assert [v.id for v in world.lanes[4].queue] == [1, 2]
    assert world.lanes[DIRECTION_OF[NodeId.C]].first_arrival_time == 0.0


if __name__ == "__main__":
    pytest.main([__file__])
