"""
Per-direction state variables and the scalar load score the controller sorts on.

The load is a weighted linear form gated by the first-vehicle confirmation:

    load = c_fva * (w_vc*v_c + w_pct*v_c_pct + w_lw*l_w)
           + w_nqb*v_nqb - w_tnn*v_tnn + w_emergency*l_p*l_d

floored at zero. Downstream congestion (v_tnn) lowers priority so a full
receiving road is not fed; the emergency term dominates every other term.
"""
from typing import Dict, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from junctionsim.errors import ScenarioError
from junctionsim.logic.intersection import NODES, NodeId

LoadVector = Dict[NodeId, float]


class DirectionState(BaseModel):
    """The eight variables one direction reports at a time instant."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    v_c: int = Field(default=0, ge=0, description="Vehicles confirmed in the queuing area")
    c_fva: int = Field(default=0, ge=0, le=1, description="First vehicle arrival confirmed (0/1)")
    v_c_pct: float = Field(default=0.0, ge=0.0, le=1.0, description="Occupancy of the first queuing segment")
    l_w: float = Field(default=0.0, ge=0.0, description="Seconds the first queued vehicle has waited")
    l_p: int = Field(default=0, ge=0, description="Priority class of the front-most special vehicle")
    l_d: int = Field(default=0, ge=0, le=1, description="Special vehicle on duty (0/1)")
    v_nqb: int = Field(default=0, ge=0, description="Vehicles queued on back roads feeding this direction")
    v_tnn: int = Field(default=0, ge=0, description="Vehicles on the downstream receiving road")

    @model_validator(mode="after")
    def _check_invariants(self) -> "DirectionState":
        if self.c_fva == 0 and (self.v_c != 0 or self.l_w != 0):
            raise ValueError("c_fva=0 requires v_c=0 and l_w=0")
        if self.l_d == 1 and self.l_p <= 0:
            raise ValueError("an on-duty special vehicle must carry a priority class")
        return self


class LoadCaps(BaseModel):
    """Scenario bounds used to check that the emergency weight dominates."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    queue_max: int = Field(default=200, gt=0, description="Largest queue a direction is expected to hold")
    wait_max: float = Field(default=3600.0, gt=0, description="Longest first-vehicle wait in seconds")


class LoadWeights(BaseModel):
    """Static weights configured when the controller is installed."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w_vc: float = Field(default=1.0, ge=0)
    w_pct: float = Field(default=10.0, ge=0)
    w_lw: float = Field(default=0.5, ge=0)
    w_nqb: float = Field(default=0.2, ge=0)
    w_tnn: float = Field(default=0.2, ge=0)
    w_emergency: float = Field(default=1e6, ge=0)
    lw_ceiling: Optional[float] = Field(
        default=None,
        gt=0,
        description="Optional cap on the waiting-time term, in seconds (uncapped when omitted)",
    )

    def non_emergency_bound(self, caps: LoadCaps) -> float:
        wait = caps.wait_max if self.lw_ceiling is None else min(caps.wait_max, self.lw_ceiling)
        return (
            self.w_vc * caps.queue_max
            + self.w_pct
            + self.w_lw * wait
            + self.w_nqb * caps.queue_max
            + self.w_tnn * caps.queue_max
        )

    def check_dominance(self, caps: LoadCaps) -> None:
        """Raise ValueError unless one on-duty vehicle outweighs any ordinary load."""
        bound = self.non_emergency_bound(caps)
        if not self.w_emergency > bound:
            raise ValueError(
                f"w_emergency={self.w_emergency} must exceed {bound} "
                f"for queue_max={caps.queue_max}, wait_max={caps.wait_max}"
            )


def direction_load(state: DirectionState, weights: LoadWeights) -> float:
    """Load of one direction, never negative."""
    l_w = state.l_w if weights.lw_ceiling is None else min(state.l_w, weights.lw_ceiling)
    queued = weights.w_vc * state.v_c + weights.w_pct * state.v_c_pct + weights.w_lw * l_w
    load = (
        state.c_fva * queued
        + weights.w_nqb * state.v_nqb
        - weights.w_tnn * state.v_tnn
        + weights.w_emergency * state.l_p * state.l_d
    )
    return max(0.0, float(load))


def compute_loads(states: Mapping[NodeId, DirectionState], weights: LoadWeights) -> LoadVector:
    """Apply direction_load to every node. All eight nodes must be present."""
    missing = [node.value for node in NODES if node not in states]
    if missing:
        raise ScenarioError(f"Load matrix is missing nodes: {', '.join(missing)}")
    return {node: direction_load(states[node], weights) for node in NODES}
