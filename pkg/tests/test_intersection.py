"""
Intersection geometry: conflict graph shape, phases and direction numbering.
"""
import pytest

from junctionsim.errors import ContractViolation
from junctionsim.logic.intersection import (
    ALL_DIRECTIONS,
    CONFLICT_GRAPH,
    DIRECTION_OF,
    NODE_OF,
    NODES,
    SLIP_LANES,
    ConflictGraph,
    NodeId,
    Phase,
    adjacency,
    compatible,
    enumerate_phases,
    node_for_direction,
)


def test_twelve_legal_phases():
    """Every unordered compatible pair, nothing else."""
    labels = [phase.label for phase in enumerate_phases()]
    assert labels == ["AB", "AD", "AE", "BF", "BG", "CD", "CF", "CG", "DH", "EF", "EH", "GH"]


def test_graph_is_symmetric_irreflexive_and_four_regular():
    for node in NODES:
        peers = adjacency(node)
        assert len(peers) == 4
        assert node not in peers
        for peer in peers:
            assert node in adjacency(peer)


def test_each_node_has_three_compatible_peers():
    for node in NODES:
        assert len(CONFLICT_GRAPH.compatible_peers(node)) == 3


def test_compatible_is_symmetric_and_excludes_self():
    for x in NODES:
        assert not compatible(x, x)
        for y in NODES:
            assert compatible(x, y) == compatible(y, x)


def test_direction_numbering_is_a_bijection():
    assert [DIRECTION_OF[node] for node in NODES] == [1, 2, 4, 5, 7, 8, 10, 11]
    assert all(NODE_OF[DIRECTION_OF[node]] == node for node in NODES)
    assert ALL_DIRECTIONS == tuple(range(1, 13))
    assert not set(SLIP_LANES) & set(NODE_OF)


def test_slip_lane_has_no_node():
    with pytest.raises(ContractViolation):
        node_for_direction(3)
    assert node_for_direction(7) == NodeId.E


def test_phase_is_unordered():
    assert Phase.parse("GC") == Phase.of(NodeId.C, NodeId.G)
    assert Phase.parse("gc").label == "CG"
    assert str(Phase.of(NodeId.D, NodeId.C)) == "CD"


def test_conflicting_pair_is_not_a_phase():
    with pytest.raises(ContractViolation):
        Phase.of(NodeId.A, NodeId.C)
    with pytest.raises(ContractViolation):
        Phase.parse("AA")
    with pytest.raises(ContractViolation):
        Phase.parse("ABC")
    with pytest.raises(ContractViolation):
        Phase.parse("XZ")


def test_malformed_tables_are_rejected():
    table = {"A": "CFGH", "B": "CDEH", "C": "ABEH", "D": "BEFG", "E": "BCDG", "F": "ADGH", "G": "ADEF", "H": "ABCF"}
    ConflictGraph(table)

    asymmetric = dict(table, A="CFGB")
    with pytest.raises(ValueError):
        ConflictGraph(asymmetric)

    reflexive = dict(table, A="AFGH")
    with pytest.raises(ValueError):
        ConflictGraph(reflexive)

    short = dict(table, A="CFG")
    with pytest.raises(ValueError):
        ConflictGraph(short)

    missing = {key: value for key, value in table.items() if key != "H"}
    with pytest.raises(ValueError):
        ConflictGraph(missing)


if __name__ == "__main__":
    pytest.main([__file__])
