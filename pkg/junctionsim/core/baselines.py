"""
Comparison controllers: fixed-time and gap-out actuated.

Both walk the same four-phase rotation and never look at the load matrix.
The actuated controller extends a green while stop-line headways stay short.
"""
from typing import Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from junctionsim.logic.intersection import NodeId, Phase
from junctionsim.logic.loads import DirectionState
from junctionsim.logic.planner import PhasePlan, TimingConfig
from junctionsim.core.controller import (
    ControllerDecision,
    ControllerMode,
    ControllerState,
    DecisionReason,
    SignalController,
    advance_intergreen,
    switch_to,
)

_EPS = 1e-9

ROTATION: Tuple[Phase, ...] = (
    Phase.of(NodeId.A, NodeId.B),
    Phase.of(NodeId.C, NodeId.D),
    Phase.of(NodeId.E, NodeId.F),
    Phase.of(NodeId.G, NodeId.H),
)


class ActuatedConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    gap_threshold: float = Field(default=3.0, gt=0, description="Headway (s) that ends a green once min_green is served")
    max_green: float = Field(default=60.0, gt=0)


def next_in_rotation(current: Phase) -> Phase:
    if current not in ROTATION:
        return ROTATION[0]
    return ROTATION[(ROTATION.index(current) + 1) % len(ROTATION)]


def fixed_time_controller(
    state: ControllerState,
    cfg: TimingConfig,
    dt: float,
) -> Tuple[ControllerState, Optional[ControllerDecision]]:
    """AB -> CD -> EF -> GH, base_green seconds each."""
    if state.mode == ControllerMode.INTERGREEN:
        return advance_intergreen(state, dt), None
    elapsed = state.phase_elapsed + dt
    if elapsed + _EPS < state.phase_budget:
        return state.model_copy(update={"phase_elapsed": elapsed}), None
    plan = PhasePlan(pair=next_in_rotation(state.current_greens), green_seconds=cfg.base_green)
    settled = state.model_copy(update={"phase_elapsed": min(elapsed, state.phase_budget)})
    return (
        switch_to(settled, plan, ControllerMode.NORMAL, cfg),
        ControllerDecision(plan=plan, reason=DecisionReason.PHASE_END),
    )


def actuated_controller(
    state: ControllerState,
    stopline_headway: float,
    cfg: TimingConfig,
    actuated: ActuatedConfig,
    dt: float,
) -> Tuple[ControllerState, Optional[ControllerDecision]]:
    """
    Same rotation; a green ends on gap-out (headway >= gap_threshold after
    min_green) or max-out (max_green).

    Decisions carry max_green as the budget; the realized green is whatever
    the gap-out leaves.
    """
    if state.mode == ControllerMode.INTERGREEN:
        return advance_intergreen(state, dt), None
    elapsed = state.phase_elapsed + dt
    maxed_out = elapsed + _EPS >= state.phase_budget
    gapped_out = elapsed + _EPS >= cfg.min_green and stopline_headway + _EPS >= actuated.gap_threshold
    if not (maxed_out or gapped_out):
        return state.model_copy(update={"phase_elapsed": elapsed}), None
    plan = PhasePlan(pair=next_in_rotation(state.current_greens), green_seconds=actuated.max_green)
    settled = state.model_copy(update={"phase_elapsed": min(elapsed, state.phase_budget)})
    return (
        switch_to(settled, plan, ControllerMode.NORMAL, cfg),
        ControllerDecision(plan=plan, reason=DecisionReason.PHASE_END),
    )


class FixedTimeController(SignalController):
    name = "FIXED"

    def tick(self, matrix: Mapping[NodeId, DirectionState], dt: float, stopline_headway: float = 0.0):
        self.state, decision = fixed_time_controller(self.state, self.timing, dt)
        return decision


class ActuatedController(SignalController):
    name = "ACTUATED"

    def __init__(self, timing: TimingConfig, actuated: ActuatedConfig, state: Optional[ControllerState] = None):
        super().__init__(timing, state)
        self.actuated = actuated

    def tick(self, matrix: Mapping[NodeId, DirectionState], dt: float, stopline_headway: float = 0.0):
        self.state, decision = actuated_controller(self.state, stopline_headway, self.timing, self.actuated, dt)
        return decision
