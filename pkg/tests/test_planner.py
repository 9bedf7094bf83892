"""
Phase selection and timing, checked against the worked example and an
independent straight-line transcription of the timing rule.
"""
import numpy as np
import pytest

from junctionsim.errors import ContractViolation
from junctionsim.logic.intersection import NODES, NodeId, Phase, enumerate_phases
from junctionsim.logic.loads import DirectionState, LoadWeights
from junctionsim.logic.planner import (
    Aggregation,
    Denominator,
    PhasePlan,
    TimingConfig,
    candidate_pairs,
    next_phase_time,
    plan_next_phase,
    select_next_phase,
)

A, B, C, D, E, F, G, H = NODES
AB = Phase.of(A, B)

# queues right after the emergency released directions 1 and 2
QUEUES = {A: 0, B: 0, C: 100, D: 100, E: 75, F: 75, G: 50, H: 50}
CONFIRMED = {node: 1 if count else 0 for node, count in QUEUES.items()}

_ADJ = {"A": "CFGH", "B": "CDEH", "C": "ABEH", "D": "BEFG", "E": "BCDG", "F": "ADGH", "G": "ADEF", "H": "ABCF"}


def _straight_line_time(v_c, c_fva, current, nxt, cycle=120.0, min_green=5.0):
    times = []
    for n in nxt:
        own = v_c[n] * c_fva[n]
        total = own
        for p in _ADJ[n]:
            if p not in current:
                total += v_c[p] * c_fva[p]
        if total == 0:
            times.append(min_green)
        else:
            times.append(own / total * cycle)
    t = (times[0] + times[1]) / 2.0
    return min(cycle, max(min_green, t))


def _matrix(queues, l_w=0.0):
    return {
        node: DirectionState(
            v_c=count,
            c_fva=1 if count else 0,
            v_c_pct=min(1.0, count / 30),
            l_w=l_w if count else 0.0,
        )
        for node, count in queues.items()
    }


def test_candidates_from_ab():
    labels = {phase.label for phase in candidate_pairs(A, B)}
    assert labels == {"CD", "CF", "EF", "CG", "GH", "DH", "EH"}


def test_candidates_have_no_duplicates_and_never_repeat_current():
    for phase in enumerate_phases():
        pairs = candidate_pairs(phase.first, phase.second)
        assert pairs
        assert phase not in pairs
        assert len(pairs) == len(set(pairs))
        for pair in pairs:
            assert pair.first not in phase and pair.second not in phase


def test_candidates_reject_conflicting_greens():
    with pytest.raises(ContractViolation):
        candidate_pairs(A, C)


def test_selection_picks_heaviest_pair():
    loads = {node: 0.0 for node in NODES}
    loads[C] = 100.0
    loads[G] = 90.0
    loads[D] = 10.0
    assert select_next_phase(candidate_pairs(A, B), loads) == Phase.parse("GC")


def test_selection_ties_go_to_the_first_pair():
    loads = {node: 0.0 for node in NODES}
    assert select_next_phase(candidate_pairs(A, B), loads).label == "CD"


def test_selection_with_loads_one_to_eight():
    loads = {node: float(index + 1) for index, node in enumerate(NODES)}
    assert select_next_phase(candidate_pairs(A, B), loads).label == "GH"


def test_selection_ignores_a_common_scale():
    rng = np.random.default_rng(31)
    phases = enumerate_phases()
    for _ in range(2_000):
        loads = {node: float(rng.integers(0, 1_000)) for node in NODES}
        factor = float(rng.integers(1, 1_000))
        scaled = {node: load * factor for node, load in loads.items()}
        for phase in phases:
            pairs = candidate_pairs(phase.first, phase.second)
            assert select_next_phase(pairs, scaled) == select_next_phase(pairs, loads)


def test_selection_needs_candidates():
    with pytest.raises(ContractViolation):
        select_next_phase([], {node: 0.0 for node in NODES})


def test_timing_worked_example():
    """Current AB, next GC: C gets 100/225 of the cycle, G gets 50/300."""
    cfg = TimingConfig()
    seconds = next_phase_time(QUEUES, CONFIRMED, AB, Phase.parse("GC"), cfg)
    assert seconds == pytest.approx(36.67, abs=0.01)


def test_timing_aggregations():
    nxt = Phase.parse("GC")
    low = next_phase_time(QUEUES, CONFIRMED, AB, nxt, TimingConfig(aggregation=Aggregation.MIN))
    high = next_phase_time(QUEUES, CONFIRMED, AB, nxt, TimingConfig(aggregation=Aggregation.MAX))
    assert low == pytest.approx(20.0)
    assert high == pytest.approx(53.333333, abs=1e-5)


def test_aggregations_are_ordered_on_random_queues():
    rng = np.random.default_rng(32)
    phases = enumerate_phases()
    for denominator in Denominator:
        by_kind = {kind: TimingConfig(aggregation=kind, denominator=denominator) for kind in Aggregation}
        for _ in range(2_000):
            v_c = {node: int(rng.integers(0, 201)) for node in NODES}
            c_fva = {node: int(rng.integers(0, 2)) for node in NODES}
            current = phases[int(rng.integers(0, len(phases)))]
            candidates = candidate_pairs(current.first, current.second)
            nxt = candidates[int(rng.integers(0, len(candidates)))]
            low, mid, high = (
                next_phase_time(v_c, c_fva, current, nxt, by_kind[kind])
                for kind in (Aggregation.MIN, Aggregation.AVG, Aggregation.MAX)
            )
            assert low <= mid + 1e-9
            assert mid <= high + 1e-9


def test_strict_denominator_leaves_own_queue_out():
    cfg = TimingConfig(denominator=Denominator.STRICT)
    seconds = next_phase_time(QUEUES, CONFIRMED, AB, Phase.parse("GC"), cfg)
    # C: 100/125 * 120 = 96, G: 50/250 * 120 = 24
    assert seconds == pytest.approx(60.0)


def test_empty_intersection_gets_min_green():
    zeros = {node: 0 for node in NODES}
    assert next_phase_time(zeros, zeros, AB, Phase.parse("CD"), TimingConfig()) == 5.0


def test_timing_is_clamped_to_full_cycle():
    queues = {node: 0 for node in NODES}
    queues[C] = 100
    queues[E] = 1
    confirmed = {node: 1 if count else 0 for node, count in queues.items()}
    cfg = TimingConfig(denominator=Denominator.STRICT)
    assert next_phase_time(queues, confirmed, AB, Phase.parse("CD"), cfg) == 120.0


def test_unconfirmed_queue_does_not_count():
    queues = dict(QUEUES)
    confirmed = dict(CONFIRMED)
    confirmed[C] = 0
    # C's side drops to 0 s; G's denominator loses nothing since C is not adjacent to G
    seconds = next_phase_time(queues, confirmed, AB, Phase.parse("GC"), TimingConfig())
    assert seconds == pytest.approx((0.0 + 50 / 300 * 120) / 2)


def test_timing_matches_straight_line_transcription():
    rng = np.random.default_rng(20240101)
    phases = enumerate_phases()
    cfg = TimingConfig()
    for _ in range(10_000):
        v_c = {node: int(rng.integers(0, 201)) for node in NODES}
        c_fva = {node: int(rng.integers(0, 2)) for node in NODES}
        current = phases[int(rng.integers(0, len(phases)))]
        candidates = candidate_pairs(current.first, current.second)
        nxt = candidates[int(rng.integers(0, len(candidates)))]
        expected = _straight_line_time(
            {node.value: count for node, count in v_c.items()},
            {node.value: flag for node, flag in c_fva.items()},
            {current.first.value, current.second.value},
            [nxt.first.value, nxt.second.value],
        )
        assert abs(next_phase_time(v_c, c_fva, current, nxt, cfg) - expected) < 1e-9


def test_plan_from_matrix():
    plan = plan_next_phase(AB, _matrix(QUEUES, l_w=1.0), TimingConfig(), LoadWeights())
    assert plan.pair.label == "CD"
    # C: 100/225, D: 100/300 of 120 s, averaged
    assert plan.green_seconds == pytest.approx((100 / 225 + 100 / 300) * 60)


def test_phase_plan_normalizes_pair():
    plan = PhasePlan(pair="GC", green_seconds=10)
    assert plan.pair == Phase(NodeId.C, NodeId.G)
    with pytest.raises(ValueError):
        PhasePlan(pair="AC", green_seconds=10)
    with pytest.raises(ValueError):
        PhasePlan(pair="CD", green_seconds=0)


def test_timing_config_order():
    with pytest.raises(ValueError):
        TimingConfig(min_green=40, base_green=30)
    with pytest.raises(ValueError):
        TimingConfig(base_green=200)


if __name__ == "__main__":
    pytest.main([__file__])
