"""
In-process RSE bus: vehicle handshakes, belt events and road-status delivery.

Producers publish; the simulation loop is the single consumer and drains the
bus once per tick. Records inside one drain come out in a fixed order:
emergency vehicle reports, other vehicle reports, belt events, then
road-status reports; within a kind by (timestamp, direction, id).
"""
import logging
from typing import Dict, List, Optional, Set, Tuple

from junctionsim.errors import MatrixDeliveryError
from junctionsim.logic.intersection import NODE_OF, NODES, NodeId
from junctionsim.logic.loads import DirectionState
from junctionsim.messaging.records import (
    BeltEvent,
    BeltKind,
    BusRecord,
    RoadStatusReport,
    VehicleReport,
)
from junctionsim.road.lanes import VehicleRecord

logger = logging.getLogger(__name__)

_EPS = 1e-9


def dispatch_key(record: BusRecord) -> Tuple[int, float, int, int]:
    if isinstance(record, VehicleReport):
        return (0 if record.emergency else 1, record.timestamp, record.direction, record.vehicle_id)
    if isinstance(record, BeltEvent):
        return (2, record.timestamp, record.direction, record.seq)
    return (3, record.timestamp, record.direction, 0)


class EventBus:
    """
    Ordered single-consumer bus.

    Args:
        delay: fixed per-message latency in seconds; a record published at
            `t` is handed out by the first drain at or after `t + delay`.
    """

    def __init__(self, delay: float = 0.0):
        if delay < 0:
            raise ValueError("message delay cannot be negative")
        self.delay = delay
        self._pending: List[Tuple[float, BusRecord]] = []
        self._seq = 0
        self._reported: Dict[int, Set[int]] = {}

    def publish(self, record: BusRecord) -> None:
        self._pending.append((record.timestamp + self.delay, record))

    @property
    def tracked(self) -> int:
        """Vehicles that reported and have not yet left their road."""
        return sum(len(seen) for seen in self._reported.values())

    def release(self, vehicle_id: int, direction: int) -> None:
        """Forget a vehicle once it has left the road it reported on."""
        seen = self._reported.get(direction)
        if seen is not None:
            seen.discard(vehicle_id)

    def handshake(self, vehicle: VehicleRecord, direction: int, now: float) -> Optional[VehicleReport]:
        """
        Vehicle <-> RSE handshake on road entry. Returns the report, or None
        when this vehicle already reported on this road.
        """
        seen = self._reported.setdefault(direction, set())
        if vehicle.id in seen:
            logger.warning("Duplicate report from vehicle %s on direction %s dropped", vehicle.id, direction)
            return None
        seen.add(vehicle.id)
        report = VehicleReport(
            vehicle_id=vehicle.id,
            kind=vehicle.kind,
            priority=vehicle.priority,
            on_duty=vehicle.on_duty,
            direction=direction,
            timestamp=now,
        )
        if report.emergency:
            logger.info("On-duty %s %s reported on direction %s at %.1fs", vehicle.kind.value, vehicle.id, direction, now)
        self.publish(report)
        return report

    def belt_event(
        self,
        belt_kind: BeltKind,
        direction: int,
        payload: int,
        timestamp: float,
        vehicle_id: Optional[int] = None,
        estimator: Optional[int] = None,
    ) -> BeltEvent:
        self._seq += 1
        event = BeltEvent(
            belt_kind=belt_kind,
            direction=direction,
            payload=payload,
            timestamp=timestamp,
            vehicle_id=vehicle_id,
            estimator=estimator,
            seq=self._seq,
        )
        if belt_kind == BeltKind.LOAD_SUBTRACTOR and vehicle_id is not None:
            self.release(vehicle_id, direction)
        self.publish(event)
        return event

    def drain(self, now: float) -> List[BusRecord]:
        """Everything deliverable at `now`, in dispatch order."""
        ready = [record for due, record in self._pending if due <= now + _EPS]
        self._pending = [(due, record) for due, record in self._pending if due > now + _EPS]
        return sorted(ready, key=dispatch_key)


def deliver_matrix(reports: List[RoadStatusReport]) -> Dict[NodeId, DirectionState]:
    """
    Turn one sampling tick's road-status reports into the controller's matrix.

    Raises:
        MatrixDeliveryError: on a slip-lane or unknown direction, a duplicate
            or missing direction, or mixed timestamps.
    """
    matrix: Dict[NodeId, DirectionState] = {}
    timestamps = {report.timestamp for report in reports}
    if len(timestamps) > 1:
        logger.error("Matrix delivery rejected: mixed timestamps %s", sorted(timestamps))
        raise MatrixDeliveryError(f"Reports carry mixed timestamps: {sorted(timestamps)}")
    for report in reports:
        node = NODE_OF.get(report.direction)
        if node is None:
            logger.error("Matrix delivery rejected: direction %s is not signalized", report.direction)
            raise MatrixDeliveryError(f"Direction {report.direction} is not a signalized direction")
        if node in matrix:
            logger.error("Matrix delivery rejected: duplicate direction %s", report.direction)
            raise MatrixDeliveryError(f"Duplicate report for direction {report.direction}")
        matrix[node] = report.state
    missing = [node.value for node in NODES if node not in matrix]
    if missing:
        logger.error("Matrix delivery rejected: missing %s", missing)
        raise MatrixDeliveryError(f"Missing reports for nodes {', '.join(missing)}")
    return {node: matrix[node] for node in NODES}
