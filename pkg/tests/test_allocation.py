"""DTOF, zone assessment, and the free/reselect/enroll step decision."""

import random
from fractions import Fraction

import pytest

from fsosim.allocation import (
    AllocationState,
    DecisionKind,
    Situation,
    ThresholdPolicy,
    ThresholdConfigError,
    UndefinedCapacityError,
    ZoneKind,
    assess,
    dtof,
    min_threshold,
    step,
)


def make_state(capacity, fired, required, **kw):
    state = AllocationState(capacity=capacity, fired=fired, **kw)
    state.observe(Situation(id="s", required=required, stable=True))
    return state


def test_dtof_direct_formula():
    state = make_state(10, 0, 2)
    assert dtof(state) == Fraction(2, 10) == Fraction(1, 5)


def test_dtof_zero_at_optimal_point():
    state = make_state(10, 4, 4)
    assert state.undershoot == 0 and state.overshoot == 0
    assert dtof(state) == 0


def test_dtof_one_at_maximal_undershoot():
    state = make_state(6, 0, 6)
    assert dtof(state) == 1


def test_dtof_exact_rational_everywhere():
    for capacity in range(1, 30):
        for under in range(0, capacity + 1):
            state = make_state(capacity, 0, under)
            assert dtof(state) == Fraction(under, capacity)


def test_dtof_undefined_for_zero_capacity():
    state = AllocationState(capacity=0)
    with pytest.raises(UndefinedCapacityError):
        dtof(state)


def test_assess_zones():
    s = Situation(id="s", required=5)
    assert assess(3, s, 10) .kind is ZoneKind.UNSAFE
    assert assess(3, s, 10).magnitude == 2
    assert assess(7, s, 10).kind is ZoneKind.OVERABUNDANT
    assert assess(7, s, 10).magnitude == 2
    assert assess(5, s, 10).kind is ZoneKind.OPTIMAL


def test_undershoot_overshoot_never_both_positive():
    rng = random.Random(11)
    for _ in range(500):
        capacity = rng.randint(1, 20)
        required = rng.randint(0, capacity)
        fired = rng.randint(0, capacity)
        state = make_state(capacity, fired, required)
        assert state.undershoot * state.overshoot == 0
        assert 0 <= dtof(state) <= 1


def test_min_threshold_lookup_and_clamp():
    policy = ThresholdPolicy(floors={"sleep": 2, "alarm": 99}, default=0)
    assert min_threshold(Situation(id="sleep", required=5), policy) == 2
    # a floor above the requirement clamps to the requirement
    assert min_threshold(Situation(id="alarm", required=4), policy) == 4
    assert min_threshold(Situation(id="other", required=3), policy) == 0


def test_min_threshold_missing_entry_errors():
    with pytest.raises(ThresholdConfigError):
        min_threshold(Situation(id="x", required=1), ThresholdPolicy())


def test_undershoot_enrolls_step_size():
    state = make_state(10, 1, 3)
    decision = step(state, Situation(id="s", required=3, stable=True), floor=0)
    assert decision.kind is DecisionKind.ENROLL and decision.count == 1


def test_reselect_replaces_enroll_when_better_candidate_exists():
    state = make_state(10, 1, 3)
    decision = step(state, Situation(id="s", required=3, stable=True), floor=0,
                    better_candidate_available=True)
    assert decision.kind is DecisionKind.RESELECT


def test_free_requires_full_stable_window():
    situation = Situation(id="s2", required=2, stable=True)
    state = AllocationState(capacity=10, fired=5, window=5)
    for tick in range(4):
        state.observe(situation)
        assert step(state, situation, floor=2).kind is DecisionKind.NO_CHANGE
    state.observe(situation)
    decision = step(state, situation, floor=2)
    assert decision.kind is DecisionKind.FREE and decision.count == 1


def test_unstable_situation_never_frees():
    situation = Situation(id="s", required=1, stable=False)
    state = AllocationState(capacity=5, fired=4, window=2)
    for _ in range(6):
        state.observe(situation)
        assert step(state, situation, floor=0).kind is DecisionKind.NO_CHANGE


def test_floor_blocks_freeing():
    situation = Situation(id="s", required=2, stable=True)
    state = AllocationState(capacity=10, fired=3, window=1)
    state.observe(situation)
    decision = step(state, situation, floor=3)
    assert decision.kind is DecisionKind.NO_CHANGE


def test_optimal_and_floor_case_no_change():
    state = make_state(10, 2, 2)
    assert step(state, Situation(id="s", required=2, stable=True), floor=2) \
        .kind is DecisionKind.NO_CHANGE


def test_situation_change_resets_hysteresis():
    calm = Situation(id="calm", required=1, stable=True)
    state = AllocationState(capacity=10, fired=6, window=3)
    for _ in range(3):
        state.observe(calm)
    assert step(state, calm, floor=0).kind is DecisionKind.FREE
    # requirement rises: the decision right after a change is never FREE
    busier = Situation(id="busier", required=4, stable=True)
    state.observe(busier)
    assert step(state, busier, floor=0).kind is not DecisionKind.FREE


def _drive(state, situation, floor, ticks=200):
    """Run the observe/step/apply loop; returns trace of fired counts."""
    trace = []
    for _ in range(ticks):
        state.observe(situation)
        decision = step(state, situation, floor)
        if decision.kind is DecisionKind.ENROLL:
            state.fired += decision.count
        elif decision.kind is DecisionKind.FREE:
            state.fired -= decision.count
        trace.append(state.fired)
    return trace


def test_convergence_from_below_exact_bound():
    rng = random.Random(31)
    for _ in range(100):
        capacity = rng.randint(1, 25)
        required = rng.randint(1, capacity)
        start = rng.randint(0, required - 1)
        step_size = rng.randint(1, 3)
        state = AllocationState(capacity=capacity, fired=start, step_size=step_size,
                                window=rng.randint(2, 6))
        situation = Situation(id="s", required=required, stable=True)
        undershoot0 = required - start
        expected_ticks = -(-undershoot0 // step_size)
        trace = _drive(state, situation, floor=0, ticks=expected_ticks + 5)
        assert trace[expected_ticks - 1] == required
        if expected_ticks >= 2:
            assert trace[expected_ticks - 2] < required
        assert all(v == required for v in trace[expected_ticks - 1:])


def test_decay_from_above_within_window_bound():
    rng = random.Random(32)
    for _ in range(100):
        capacity = rng.randint(2, 25)
        required = rng.randint(0, capacity - 1)
        start = rng.randint(required + 1, capacity)
        window = rng.randint(2, 6)
        floor = rng.randint(0, start)
        state = AllocationState(capacity=capacity, fired=start, step_size=1,
                                window=window)
        situation = Situation(id="s", required=required, stable=True)
        overshoot0 = start - required
        floor_clamped = min_threshold(situation, ThresholdPolicy(default=floor))
        target = max(required, floor_clamped)
        bound = window * overshoot0
        trace = _drive(state, situation, floor_clamped, ticks=bound + 5)
        assert trace[bound - 1] == target
        assert all(v == target for v in trace[bound:])


def test_dtof_history_replays_from_trace():
    rng = random.Random(33)
    state = AllocationState(capacity=12, fired=0)
    logged = []
    for _ in range(80):
        situation = Situation(id="s", required=rng.randint(0, 12), stable=True)
        state.fired = rng.randint(0, 12)
        state.observe(situation)
        logged.append((state.fired, situation.required, state.capacity))
    replayed = [
        Fraction(max(0, required - fired), capacity)
        for fired, required, capacity in logged
    ]
    assert list(state.dtof_history)[-80:] == replayed
