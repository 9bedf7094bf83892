"""
DT3P traffic-light controller.

Phase 1: NORMAL operation. The current pair stays green for its budget; at the
         end the planner elects the next pair and its green time.
Phase 2: PREEMPT. An on-duty special vehicle takes the lights: its direction
         plus the heaviest compatible mate go green and hold until the
         vehicle crosses the stop line.
Phase 3: RECOVERY. Nothing special happens here: the first decision after
         clearance is an ordinary DT3P decision on the distorted queues.

Every light change passes through INTERGREEN (all red) for `intergreen` seconds.
The state machine is pure: each operation returns a new ControllerState.
"""
import logging
from enum import Enum
from typing import Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from junctionsim.errors import ContractViolation
from junctionsim.logic.intersection import CONFLICT_GRAPH, NodeId, Phase
from junctionsim.logic.loads import DirectionState, LoadWeights, compute_loads
from junctionsim.logic.planner import PhasePlan, TimingConfig, plan_next_phase

logger = logging.getLogger(__name__)

_EPS = 1e-9


class ControllerMode(str, Enum):
    NORMAL = "NORMAL"
    PREEMPT = "PREEMPT"
    INTERGREEN = "INTERGREEN"


class DecisionReason(str, Enum):
    PHASE_END = "PHASE_END"
    PREEMPTION = "PREEMPTION"
    RECOVERY_START = "RECOVERY_START"


class ControllerState(BaseModel):
    model_config = ConfigDict(frozen=True)

    current_greens: Phase = Field(description="Pair being served, or the last one served while all-red")
    phase_elapsed: float = Field(default=0.0, ge=0)
    phase_budget: float = Field(default=0.0, ge=0)
    mode: ControllerMode = ControllerMode.NORMAL
    preempt_target: Optional[NodeId] = None
    pending: Optional[PhasePlan] = Field(default=None, description="Plan that goes green when the all-red ends")
    pending_mode: ControllerMode = ControllerMode.NORMAL
    intergreen_remaining: float = Field(default=0.0, ge=0)

    @property
    def lit_greens(self) -> Tuple[NodeId, ...]:
        if self.mode == ControllerMode.INTERGREEN:
            return ()
        return tuple(self.current_greens)

    @property
    def preempting(self) -> bool:
        if self.mode == ControllerMode.INTERGREEN:
            return self.pending_mode == ControllerMode.PREEMPT
        return self.mode == ControllerMode.PREEMPT


class ControllerDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    plan: PhasePlan
    reason: DecisionReason

    @property
    def mode(self) -> ControllerMode:
        return ControllerMode.PREEMPT if self.reason == DecisionReason.PREEMPTION else ControllerMode.NORMAL


def initial_state(current: Phase = Phase(NodeId.A, NodeId.B)) -> ControllerState:
    """Controller that has just released `current`; the first tick decides."""
    return ControllerState(current_greens=current)


def switch_to(
    state: ControllerState,
    plan: PhasePlan,
    mode_after: ControllerMode,
    cfg: TimingConfig,
    preempt_target: Optional[NodeId] = None,
) -> ControllerState:
    if state.mode == ControllerMode.INTERGREEN:
        # all-red already running: swap the pending plan, keep the clearance left
        return state.model_copy(
            update={"pending": plan, "pending_mode": mode_after, "preempt_target": preempt_target}
        )
    if cfg.intergreen <= 0:
        return state.model_copy(
            update={
                "current_greens": plan.pair,
                "phase_elapsed": 0.0,
                "phase_budget": plan.green_seconds,
                "mode": mode_after,
                "preempt_target": preempt_target,
                "pending": None,
                "intergreen_remaining": 0.0,
            }
        )
    return state.model_copy(
        update={
            "phase_elapsed": 0.0,
            "mode": ControllerMode.INTERGREEN,
            "preempt_target": preempt_target,
            "pending": plan,
            "pending_mode": mode_after,
            "intergreen_remaining": cfg.intergreen,
        }
    )


def advance_intergreen(state: ControllerState, dt: float) -> ControllerState:
    remaining = state.intergreen_remaining - dt
    if remaining > _EPS:
        return state.model_copy(update={"intergreen_remaining": remaining})
    plan = state.pending
    return state.model_copy(
        update={
            "current_greens": plan.pair,
            "phase_elapsed": 0.0,
            "phase_budget": plan.green_seconds,
            "mode": state.pending_mode,
            "pending": None,
            "pending_mode": ControllerMode.NORMAL,
            "intergreen_remaining": 0.0,
        }
    )


def on_tick(
    state: ControllerState,
    matrix: Mapping[NodeId, DirectionState],
    cfg: TimingConfig,
    weights: LoadWeights,
    dt: float,
) -> Tuple[ControllerState, Optional[ControllerDecision]]:
    """Advance time by `dt`; decide the next phase when the current budget runs out."""
    if dt <= 0:
        raise ContractViolation("dt must be positive")
    if state.mode == ControllerMode.INTERGREEN:
        return advance_intergreen(state, dt), None
    elapsed = state.phase_elapsed + dt
    if state.mode == ControllerMode.PREEMPT:
        # held until the emergency vehicle clears
        return state.model_copy(update={"phase_elapsed": elapsed}), None
    if elapsed + _EPS < state.phase_budget:
        return state.model_copy(update={"phase_elapsed": elapsed}), None

    plan = plan_next_phase(state.current_greens, matrix, cfg, weights)
    decision = ControllerDecision(plan=plan, reason=DecisionReason.PHASE_END)
    logger.debug("Phase end after %.1fs: %s for %.2fs", elapsed, plan.pair, plan.green_seconds)
    settled = state.model_copy(update={"phase_elapsed": min(elapsed, state.phase_budget)})
    return switch_to(settled, plan, ControllerMode.NORMAL, cfg), decision


def preemption_mate(direction: NodeId, matrix: Mapping[NodeId, DirectionState], weights: LoadWeights) -> NodeId:
    """Heaviest node compatible with `direction`; equal loads go to the earlier letter."""
    loads = compute_loads(matrix, weights)
    peers = CONFLICT_GRAPH.compatible_peers(direction)
    return min(peers, key=lambda peer: (-loads[peer], peer))


def on_emergency(
    state: ControllerState,
    direction: NodeId,
    matrix: Mapping[NodeId, DirectionState],
    cfg: TimingConfig,
    weights: LoadWeights,
) -> Tuple[ControllerState, ControllerDecision]:
    """
    Give the lights to an on-duty special vehicle on `direction`.

    Raises:
        ContractViolation: if the matrix does not show the vehicle on duty.
    """
    direction = NodeId(direction)
    if matrix[direction].l_d != 1:
        raise ContractViolation(f"No on-duty special vehicle reported on {direction}")

    if state.mode != ControllerMode.INTERGREEN and direction in state.current_greens:
        plan = PhasePlan(pair=state.current_greens, green_seconds=cfg.full_cycle_time)
        logger.info("Preemption for %s: already green, holding %s", direction, state.current_greens)
        held = state.model_copy(update={"mode": ControllerMode.PREEMPT, "preempt_target": direction})
        return held, ControllerDecision(plan=plan, reason=DecisionReason.PREEMPTION)

    mate = preemption_mate(direction, matrix, weights)
    plan = PhasePlan(pair=Phase.of(direction, mate), green_seconds=cfg.full_cycle_time)
    logger.info("Preemption for %s: switching to %s", direction, plan.pair)
    next_state = switch_to(state, plan, ControllerMode.PREEMPT, cfg, preempt_target=direction)
    return next_state, ControllerDecision(plan=plan, reason=DecisionReason.PREEMPTION)


def on_emergency_cleared(
    state: ControllerState,
    matrix: Mapping[NodeId, DirectionState],
    cfg: TimingConfig,
    weights: LoadWeights,
) -> Tuple[ControllerState, ControllerDecision]:
    """Emergency vehicle crossed the stop line: resume DT3P from the current matrix."""
    if state.mode != ControllerMode.PREEMPT:
        raise ContractViolation(f"Clearance outside preemption (mode={state.mode.value})")
    plan = plan_next_phase(state.current_greens, matrix, cfg, weights)
    logger.info("Emergency on %s cleared; recovery starts with %s", state.preempt_target, plan.pair)
    next_state = switch_to(state, plan, ControllerMode.NORMAL, cfg)
    return next_state, ControllerDecision(plan=plan, reason=DecisionReason.RECOVERY_START)


class SignalController:
    """Common surface the driver talks to. Baselines leave preemption out."""

    name = "BASE"
    supports_preemption = False

    def __init__(self, timing: TimingConfig, state: Optional[ControllerState] = None):
        self.timing = timing
        self.state = state or initial_state()

    @property
    def lit_greens(self) -> Tuple[NodeId, ...]:
        return self.state.lit_greens

    @property
    def preempting(self) -> bool:
        return self.state.preempting

    def tick(
        self,
        matrix: Mapping[NodeId, DirectionState],
        dt: float,
        stopline_headway: float = 0.0,
    ) -> Optional[ControllerDecision]:
        raise NotImplementedError

    def emergency(self, direction: NodeId, matrix: Mapping[NodeId, DirectionState]) -> ControllerDecision:
        raise ContractViolation(f"{self.name} controller has no preemption input")

    def cleared(self, matrix: Mapping[NodeId, DirectionState]) -> ControllerDecision:
        raise ContractViolation(f"{self.name} controller has no preemption input")


class Dt3pController(SignalController):
    name = "DT3P"
    supports_preemption = True

    def __init__(self, timing: TimingConfig, weights: LoadWeights, state: Optional[ControllerState] = None):
        super().__init__(timing, state)
        self.weights = weights

    def tick(self, matrix, dt, stopline_headway=0.0):
        self.state, decision = on_tick(self.state, matrix, self.timing, self.weights, dt)
        return decision

    def emergency(self, direction, matrix):
        self.state, decision = on_emergency(self.state, direction, matrix, self.timing, self.weights)
        return decision

    def cleared(self, matrix):
        self.state, decision = on_emergency_cleared(self.state, matrix, self.timing, self.weights)
        return decision
