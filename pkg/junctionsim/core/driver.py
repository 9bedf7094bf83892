"""
Turns the RSE's ordered message stream into controller calls.

The same driver runs behind a live simulation and behind a replay of its
events.log, so both produce the same decisions.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from junctionsim.core.controller import ControllerDecision, ControllerMode, SignalController
from junctionsim.logic.intersection import NODE_OF, NODES, NodeId
from junctionsim.logic.loads import DirectionState
from junctionsim.messaging.bus import deliver_matrix
from junctionsim.messaging.records import (
    BeltEvent,
    BeltKind,
    DecisionRecord,
    RoadStatusReport,
    TickMarker,
    VehicleReport,
)

logger = logging.getLogger(__name__)

_EMPTY_MATRIX: Dict[NodeId, DirectionState] = {node: DirectionState() for node in NODES}


class ControllerDriver:
    def __init__(self, controller: SignalController):
        self.controller = controller
        self.decisions: List[DecisionRecord] = []
        self.transcript: list = []
        self._matrix: Optional[Dict[NodeId, DirectionState]] = None
        self._outstanding: Dict[NodeId, List[int]] = {node: [] for node in NODES}
        self._tracked: Optional[Tuple[NodeId, int]] = None
        self._last_departure: Dict[NodeId, float] = {}
        self._phase_start = 0.0
        self._lit = controller.lit_greens

    @property
    def lit_greens(self) -> Tuple[NodeId, ...]:
        return self.controller.lit_greens

    @property
    def matrix(self) -> Dict[NodeId, DirectionState]:
        return self._matrix if self._matrix is not None else _EMPTY_MATRIX

    def stopline_headway(self, now: float) -> float:
        """Seconds since the last stop-line crossing on a lit direction, or since the green began."""
        lit = self.controller.lit_greens
        if not lit:
            return 0.0
        last = max([self._last_departure.get(node, self._phase_start) for node in lit] + [self._phase_start])
        return now - last

    def _record(self, decision: ControllerDecision, now: float) -> DecisionRecord:
        record = DecisionRecord(
            sim_time=now,
            reason=decision.reason.value,
            pair=decision.plan.pair.label,
            green_seconds=decision.plan.green_seconds,
            mode=decision.mode.value,
        )
        self.decisions.append(record)
        logger.debug("t=%.1f %s %s %.2fs", now, record.reason, record.pair, record.green_seconds)
        return record

    def _next_emergency(self, matrix: Dict[NodeId, DirectionState]) -> Optional[NodeId]:
        for node in NODES:
            if self._outstanding[node] and matrix[node].l_d == 1:
                return node
        return None

    def _preempt(self, node: NodeId, matrix, now: float) -> DecisionRecord:
        self._tracked = (node, self._outstanding[node][0])
        return self._record(self.controller.emergency(node, matrix), now)

    def dispatch(self, records: Sequence, now: float, dt: float) -> List[DecisionRecord]:
        """Feed one tick's records (already in dispatch order) to the controller."""
        self.transcript.extend(records)
        self.transcript.append(TickMarker(sim_time=now, dt=dt))

        cleared = False
        reports: List[RoadStatusReport] = []
        for record in records:
            if isinstance(record, VehicleReport):
                node = NODE_OF.get(record.direction)
                if record.emergency and node is not None:
                    self._outstanding[node].append(record.vehicle_id)
            elif isinstance(record, BeltEvent):
                if record.belt_kind != BeltKind.LOAD_SUBTRACTOR:
                    continue
                node = NODE_OF[record.direction]
                self._last_departure[node] = record.timestamp
                if record.vehicle_id in self._outstanding[node]:
                    self._outstanding[node].remove(record.vehicle_id)
                if self._tracked == (node, record.vehicle_id):
                    cleared = True
            elif isinstance(record, RoadStatusReport):
                reports.append(record)

        if reports:
            self._matrix = deliver_matrix(reports)
        matrix = self.matrix

        emitted: List[DecisionRecord] = []
        if self.controller.supports_preemption:
            if cleared and self.controller.state.mode == ControllerMode.PREEMPT:
                self._tracked = None
                target = self._next_emergency(matrix)
                if target is None:
                    emitted.append(self._record(self.controller.cleared(matrix), now))
                else:
                    emitted.append(self._preempt(target, matrix, now))
            elif not self.controller.preempting:
                target = self._next_emergency(matrix)
                if target is not None:
                    emitted.append(self._preempt(target, matrix, now))

        if not emitted:
            decision = self.controller.tick(matrix, dt, self.stopline_headway(now))
            if decision is not None:
                emitted.append(self._record(decision, now))

        if self.controller.lit_greens != self._lit:
            self._lit = self.controller.lit_greens
            self._phase_start = now
        return emitted
