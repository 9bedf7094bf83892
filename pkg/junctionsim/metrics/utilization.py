"""
Green-time accounting: the green and departure logs, the utilization ratio,
per-window green splits and end-of-run summaries.

Utilization counts green capacity in saturation-headway slots. An interval of
length L holds floor(L / headway) slots; a slot is productive when a vehicle
crossed the stop line on that green.
"""
import math
from bisect import bisect_right
from typing import Dict, Iterable, List, NamedTuple

import numpy as np
import pandas as pd

from junctionsim.logic.intersection import NODES, NodeId

_EPS = 1e-9


class GreenInterval(NamedTuple):
    node: NodeId
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start


class Departure(NamedTuple):
    node: NodeId
    time: float
    vehicle_id: int


def interval_slots(interval: GreenInterval, headway: float) -> int:
    return int(math.floor(interval.duration / headway + _EPS))


def utilization(
    green_log: Iterable[GreenInterval],
    departure_log: Iterable[Departure],
    headway: float = 2.0,
) -> float:
    """Productive slots / total slots over the logs; 0.0 when no green was given."""
    times: Dict[NodeId, List[float]] = {node: [] for node in NODES}
    for departure in departure_log:
        times[departure.node].append(departure.time)
    for node_times in times.values():
        node_times.sort()

    total = 0
    productive = 0
    for interval in green_log:
        slots = interval_slots(interval, headway)
        node_times = times[interval.node]
        served = bisect_right(node_times, interval.end + _EPS) - bisect_right(node_times, interval.start + _EPS)
        total += slots
        productive += min(slots, served)
    if total == 0:
        return 0.0
    return productive / total


def green_splits(frames: pd.DataFrame, window: float) -> pd.DataFrame:
    """
    Green seconds each direction received per window, from the cumulative
    `green_*` columns of a frames table.

    Returns one row per window with `window_start`, `window_end` and one
    column per node.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    columns = [f"green_{node.value}" for node in NODES]
    if frames.empty:
        return pd.DataFrame(columns=["window_start", "window_end"] + [node.value for node in NODES])
    window_id = np.floor((frames["sim_time"].to_numpy() - _EPS) / window).astype(int)
    last = frames[columns].groupby(window_id).last()
    splits = last - last.shift(1, fill_value=0.0)
    splits.columns = [node.value for node in NODES]
    splits = splits.round(6)
    splits.insert(0, "window_end", (splits.index + 1) * window)
    splits.insert(0, "window_start", splits.index * window)
    return splits.reset_index(drop=True)


def summarize(frames: pd.DataFrame) -> Dict[str, float]:
    """Final queue spread statistics, final utilization and the run's mean queue."""
    if frames.empty:
        return {"final_std": 0.0, "spread": 0.0, "utilization": 0.0, "mean_queue": 0.0}
    queue_columns = [f"queue_{node.value}" for node in NODES]
    final = frames[queue_columns].iloc[-1].to_numpy(dtype=float)
    return {
        "final_std": float(np.std(final)),
        "spread": float(final.max() - final.min()),
        "utilization": float(frames["utilization"].iloc[-1]),
        "mean_queue": float(frames["mean_queue"].mean()),
    }
