"""
The two phase decisions: which compatible pair goes green next, and for how long.

Selection pairs every conflict of the first current green with every conflict
of the second, drops self-pairs and conflicting pairs, and keeps the pair with
the largest load sum. Timing gives each elected direction the share of the full
cycle that its confirmed queue holds among its crossing queues, then combines
the two shares.
"""
from enum import Enum
from typing import Dict, List, Mapping, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from junctionsim.errors import ContractViolation
from junctionsim.logic.intersection import NodeId, Phase, adjacency, compatible
from junctionsim.logic.loads import DirectionState, LoadVector, LoadWeights, compute_loads


class Aggregation(str, Enum):
    MIN = "MIN"
    AVG = "AVG"
    MAX = "MAX"


class Denominator(str, Enum):
    # own queue counted among its crossings (ratios stay in [0, 1])
    OWN_QUEUE = "own_queue"
    # adjacency mask only; the elected direction's own queue is left out
    STRICT = "strict"


class TimingConfig(BaseModel):
    """Phase timing constants. Keys map 1:1 to the scenario file's `timing` block."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    full_cycle_time: float = Field(default=120.0, gt=0, description="Reference period the ratios scale against")
    base_green: float = Field(default=30.0, gt=0, description="Green per phase for the fixed-time rotation")
    min_green: float = Field(default=5.0, gt=0)
    aggregation: Aggregation = Field(default=Aggregation.AVG)
    intergreen: float = Field(default=3.0, ge=0, description="All-red clearance between phases")
    denominator: Denominator = Field(default=Denominator.OWN_QUEUE)

    @model_validator(mode="after")
    def _check_order(self) -> "TimingConfig":
        if not (self.min_green <= self.base_green <= self.full_cycle_time):
            raise ValueError("timing must satisfy min_green <= base_green <= full_cycle_time")
        return self


class PhasePlan(BaseModel):
    """A chosen compatible pair and how long it stays green."""

    model_config = ConfigDict(frozen=True)

    pair: Phase
    green_seconds: float = Field(gt=0)

    @field_validator("pair", mode="before")
    @classmethod
    def _normalize_pair(cls, value):
        if isinstance(value, str):
            return Phase.parse(value)
        first, second = value
        return Phase.of(first, second)


def candidate_pairs(g1: NodeId, g2: NodeId) -> List[Phase]:
    """
    Phases reachable from the current greens (g1, g2).

    Pairs adjacency(g1) x adjacency(g2), removes self-pairs and conflicting
    pairs, and folds XY/YX into one unordered phase (first occurrence wins).

    Raises:
        ContractViolation: if (g1, g2) is not itself a legal phase.
    """
    if not compatible(g1, g2):
        raise ContractViolation(f"Current greens {g1}{g2} conflict")
    seen = set()
    pairs: List[Phase] = []
    for x in sorted(adjacency(g1)):
        for y in sorted(adjacency(g2)):
            if not compatible(x, y):
                continue
            phase = Phase.of(x, y)
            if phase not in seen:
                seen.add(phase)
                pairs.append(phase)
    return pairs


def select_next_phase(pairs: Sequence[Phase], loads: Mapping[NodeId, float]) -> Phase:
    """Pair with the largest load sum; equal sums go to the lexicographically first pair."""
    if not pairs:
        raise ContractViolation("No candidate pairs to select from")
    ranked = sorted(
        pairs,
        key=lambda phase: (-(loads[phase.first] + loads[phase.second]), phase.first, phase.second),
    )
    return ranked[0]


def _side_time(
    node: NodeId,
    confirmed: Mapping[NodeId, float],
    current: Phase,
    cfg: TimingConfig,
) -> float:
    own = confirmed.get(node, 0)
    crossing = sum(confirmed.get(peer, 0) for peer in adjacency(node) if peer not in current)
    denominator = crossing + own if cfg.denominator == Denominator.OWN_QUEUE else crossing
    if denominator <= 0:
        return cfg.min_green
    return own / denominator * cfg.full_cycle_time


def next_phase_time(
    v_c: Mapping[NodeId, int],
    c_fva: Mapping[NodeId, int],
    current: Phase,
    next_pair: Phase,
    cfg: TimingConfig,
) -> float:
    """
    Green duration in seconds for the elected phase `next_pair`.

    Only confirmed queues (v_c * c_fva) count. Slip lanes carry no state and
    contribute nothing. A side whose denominator is zero gets min_green.
    The result is clamped to [min_green, full_cycle_time].
    """
    confirmed: Dict[NodeId, float] = {
        node: v_c.get(node, 0) * c_fva.get(node, 0) for node in set(v_c) | set(c_fva)
    }
    sides = [_side_time(node, confirmed, current, cfg) for node in next_pair]
    if cfg.aggregation == Aggregation.MIN:
        combined = min(sides)
    elif cfg.aggregation == Aggregation.MAX:
        combined = max(sides)
    else:
        combined = sum(sides) / len(sides)
    return min(cfg.full_cycle_time, max(cfg.min_green, combined))


def plan_next_phase(
    current: Phase,
    matrix: Mapping[NodeId, DirectionState],
    timing: TimingConfig,
    weights: LoadWeights,
) -> PhasePlan:
    """Full decision from a road-status matrix: loads -> candidates -> selection -> timing."""
    loads: LoadVector = compute_loads(matrix, weights)
    chosen = select_next_phase(candidate_pairs(current.first, current.second), loads)
    seconds = next_phase_time(
        {node: state.v_c for node, state in matrix.items()},
        {node: state.c_fva for node, state in matrix.items()},
        current,
        chosen,
        timing,
    )
    return PhasePlan(pair=chosen, green_seconds=seconds)
