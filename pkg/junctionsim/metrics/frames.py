"""
Per-second metrics frames and their CSV form.

Frames are rounded to 6 decimals when recorded so the CSV written by pandas
reads back to exactly the same values.
"""
import logging
from pathlib import Path
from typing import Dict, List

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from junctionsim.logic.intersection import DIRECTION_OF, NODES, NodeId

logger = logging.getLogger(__name__)

_DECIMALS = 6


def frame_columns() -> List[str]:
    return (
        ["sim_time"]
        + [f"queue_{node.value}" for node in NODES]
        + [f"green_{node.value}" for node in NODES]
        + ["utilization", "mean_queue"]
    )


class MetricsFrame(BaseModel):
    model_config = ConfigDict(frozen=True)

    sim_time: float
    queues: Dict[NodeId, int]
    greens: Dict[NodeId, float] = Field(description="Cumulative green seconds")
    utilization: float = Field(ge=0.0, le=1.0)
    mean_queue: float = Field(ge=0.0)

    def to_row(self) -> Dict[str, float]:
        row: Dict[str, float] = {"sim_time": self.sim_time}
        row.update({f"queue_{node.value}": self.queues[node] for node in NODES})
        row.update({f"green_{node.value}": self.greens[node] for node in NODES})
        row["utilization"] = self.utilization
        row["mean_queue"] = self.mean_queue
        return row

    @classmethod
    def from_row(cls, row: Dict) -> "MetricsFrame":
        return cls(
            sim_time=float(row["sim_time"]),
            queues={node: int(row[f"queue_{node.value}"]) for node in NODES},
            greens={node: float(row[f"green_{node.value}"]) for node in NODES},
            utilization=float(row["utilization"]),
            mean_queue=float(row["mean_queue"]),
        )


class MetricsRecorder:
    """Samples a World into frames."""

    def __init__(self):
        self.frames: List[MetricsFrame] = []

    def record(self, world) -> MetricsFrame:
        queues = {node: len(world.lanes[DIRECTION_OF[node]].queue) for node in NODES}
        frame = MetricsFrame(
            sim_time=round(world.clock, _DECIMALS),
            queues=queues,
            greens={node: round(world.green_seconds[node], _DECIMALS) for node in NODES},
            utilization=round(world.utilization_to_date, _DECIMALS),
            mean_queue=round(sum(queues.values()) / len(NODES), _DECIMALS),
        )
        self.frames.append(frame)
        return frame

    def to_dataframe(self) -> pd.DataFrame:
        return frames_to_dataframe(self.frames)


def frames_to_dataframe(frames: List[MetricsFrame]) -> pd.DataFrame:
    return pd.DataFrame([frame.to_row() for frame in frames], columns=frame_columns())


def write_frames_csv(frames: List[MetricsFrame], path: Path) -> Path:
    path = Path(path)
    frames_to_dataframe(frames).to_csv(path, index=False, lineterminator="\n")
    logger.info("Wrote %d frames to %s", len(frames), path)
    return path


def read_frames_csv(path: Path) -> List[MetricsFrame]:
    table = pd.read_csv(path, float_precision="round_trip")
    return [MetricsFrame.from_row(row) for row in table.to_dict(orient="records")]
