"""
Four-leg intersection geometry: the eight signalized directions, their
direction-index numbering, and the fixed conflict (adjacency) graph.

Two movements are "adjacent" when their paths cross, so they can never be
green together. A phase is always an unordered pair of non-adjacent nodes.
"""
from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, List, NamedTuple, Tuple

from junctionsim.errors import ContractViolation


class NodeId(str, Enum):
    """Signalized direction. Letter order is the tie-breaking order."""

    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"
    H = "H"

    def __str__(self) -> str:
        return self.value


NODES: Tuple[NodeId, ...] = tuple(NodeId)

# node <-> direction index; 3, 6, 9 and 12 are the unsignalized slip lanes
DIRECTION_OF: Dict[NodeId, int] = {
    NodeId.A: 1,
    NodeId.B: 2,
    NodeId.C: 4,
    NodeId.D: 5,
    NodeId.E: 7,
    NodeId.F: 8,
    NodeId.G: 10,
    NodeId.H: 11,
}
NODE_OF: Dict[int, NodeId] = {index: node for node, index in DIRECTION_OF.items()}
SLIP_LANES: Tuple[int, ...] = (3, 6, 9, 12)
ALL_DIRECTIONS: Tuple[int, ...] = tuple(sorted(list(NODE_OF) + list(SLIP_LANES)))

_ADJACENCY_TABLE: Dict[str, str] = {
    "A": "CFGH",
    "B": "CDEH",
    "C": "ABEH",
    "D": "BEFG",
    "E": "BCDG",
    "F": "ADGH",
    "G": "ADEF",
    "H": "ABCF",
}


def node_for_direction(direction: int) -> NodeId:
    """Map a signalized direction index to its node; slip lanes are rejected."""
    try:
        return NODE_OF[direction]
    except KeyError:
        raise ContractViolation(f"Direction {direction} is not a signalized direction") from None


class ConflictGraph:
    """
    Symmetric, irreflexive, 4-regular conflict graph over the eight nodes.
    Immutable once built; the shape is checked at construction.
    """

    def __init__(self, table: Dict[str, str]):
        adjacency = {
            NodeId(node): frozenset(NodeId(peer) for peer in peers)
            for node, peers in table.items()
        }
        if set(adjacency) != set(NODES):
            raise ValueError("Conflict table must list all eight nodes")
        for node, peers in adjacency.items():
            if node in peers:
                raise ValueError(f"Node {node} conflicts with itself")
            if len(peers) != 4:
                raise ValueError(f"Node {node} has {len(peers)} conflicts, expected 4")
            for peer in peers:
                if node not in adjacency[peer]:
                    raise ValueError(f"Conflict {node}-{peer} is not symmetric")
        self._adjacency: Dict[NodeId, FrozenSet[NodeId]] = adjacency

    def adjacency(self, node: NodeId) -> FrozenSet[NodeId]:
        return self._adjacency[NodeId(node)]

    def compatible(self, x: NodeId, y: NodeId) -> bool:
        return x != y and NodeId(y) not in self._adjacency[NodeId(x)]

    def compatible_peers(self, node: NodeId) -> List[NodeId]:
        return [peer for peer in NODES if self.compatible(node, peer)]


CONFLICT_GRAPH = ConflictGraph(_ADJACENCY_TABLE)


class Phase(NamedTuple):
    """Unordered pair of compatible nodes, stored in letter order."""

    first: NodeId
    second: NodeId

    @classmethod
    def of(cls, x: NodeId, y: NodeId) -> "Phase":
        x, y = NodeId(x), NodeId(y)
        if not CONFLICT_GRAPH.compatible(x, y):
            raise ContractViolation(f"{x}{y} is not a legal phase")
        return cls(*sorted((x, y)))

    @classmethod
    def parse(cls, label: str) -> "Phase":
        """Build a phase from a two-letter label such as "GC"."""
        label = (label or "").strip().upper()
        if len(label) != 2:
            raise ContractViolation(f"Phase label must be two letters, got {label!r}")
        try:
            return cls.of(NodeId(label[0]), NodeId(label[1]))
        except ValueError as exc:
            raise ContractViolation(str(exc)) from None

    @property
    def label(self) -> str:
        return f"{self.first.value}{self.second.value}"

    def __str__(self) -> str:
        return self.label


def adjacency(node: NodeId) -> FrozenSet[NodeId]:
    """Fixed 4-element conflict set for a node."""
    return CONFLICT_GRAPH.adjacency(node)


def compatible(x: NodeId, y: NodeId) -> bool:
    """True when the two movements may be green at the same time."""
    return CONFLICT_GRAPH.compatible(x, y)


def enumerate_phases() -> List[Phase]:
    """All legal phases, in (first letter, second letter) order. There are 12."""
    return [Phase(x, y) for x, y in combinations(NODES, 2) if compatible(x, y)]
