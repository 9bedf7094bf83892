from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field

from junctionsim.core.scenario import ControllerKind
from junctionsim.logic.intersection import NodeId
from junctionsim.logic.loads import DirectionState, LoadWeights
from junctionsim.logic.planner import TimingConfig


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"


class NextPhaseRequest(BaseModel):
    current: str = Field(..., example="AB", description="Pair currently green, two letters")
    matrix: Dict[NodeId, DirectionState] = Field(..., description="Road-status variables for all eight nodes")
    timing: Optional[TimingConfig] = None
    weights: Optional[LoadWeights] = None


class NextPhaseResponse(BaseModel):
    pair: str = Field(..., example="CD")
    green_seconds: float
    candidates: List[str] = Field(default=[], description="Pairs considered, in candidate order")
    loads: Dict[str, float] = Field(default={}, description="Load per node")


class RunExperimentRequest(BaseModel):
    scenario: str = Field(..., example="paper-s4")
    controller: Optional[ControllerKind] = None
    duration: Optional[Union[float, str]] = Field(default=None, example="4-cycles")
    seed: Optional[int] = None


class RunExperimentResponse(BaseModel):
    scenario: str
    controller: ControllerKind
    duration: float
    final_std: float
    spread: float
    utilization: float = Field(..., ge=0.0, le=1.0)
    mean_queue: float
    decisions: int
