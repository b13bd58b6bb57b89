"""Adaptive dimensioning of the resources allocated to a situation.

Each governing level keeps an allocation state: capacity, the count of fired
(activated) nodes, and the undershoot/overshoot of that count against what
the current situation requires.  The distance-to-failure (DTOF) normalizes
the undershoot by capacity; the per-tick step decision enrolls nodes while
undershooting, and frees them, gradually and only after a sustained stable
overshoot, down to a preconfigured floor that keeps reaction prompt.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional


class UndefinedCapacityError(ZeroDivisionError):
    """DTOF is undefined for a zero-capacity level."""


class ThresholdConfigError(KeyError):
    """No floor configured for a situation and no default given."""


@dataclass(frozen=True)
class Situation:
    """A recognized context state and the node count it calls for."""

    id: str
    required: int
    stable: bool = False
    relevant_figures: frozenset[str] = frozenset()
    protocols: tuple[str, ...] = ()

    def __post_init__(self):
        if self.required < 0:
            raise ValueError("a situation cannot require a negative node count")


# Situation in force when a level has not been given one: nothing is required.
IDLE_SITUATION = Situation(id="", required=0, stable=True)


class ZoneKind(Enum):
    UNSAFE = "unsafe"
    OVERABUNDANT = "overabundant"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class Zone:
    kind: ZoneKind
    magnitude: int = 0


def assess(fired: int, situation: Situation, capacity: int) -> Zone:
    """Place an allocation in the unsafe / overabundant / optimal zone.

    Unsafe carries the undershoot (how far below the requirement), and
    overabundant carries the overshoot.
    """
    if fired < 0 or fired > capacity:
        raise ValueError("fired count must lie in [0, capacity]")
    if fired < situation.required:
        return Zone(ZoneKind.UNSAFE, situation.required - fired)
    if fired > situation.required:
        return Zone(ZoneKind.OVERABUNDANT, fired - situation.required)
    return Zone(ZoneKind.OPTIMAL)


class DecisionKind(Enum):
    FREE = "free"
    RESELECT = "reselect"
    ENROLL = "enroll"
    NO_CHANGE = "no_change"


@dataclass(frozen=True)
class AllocationDecision:
    kind: DecisionKind
    count: int = 0

    def __post_init__(self):
        if self.kind in (DecisionKind.FREE, DecisionKind.ENROLL) and self.count < 1:
            raise ValueError("free/enroll decisions move at least one node")

    def __str__(self):
        if self.kind in (DecisionKind.FREE, DecisionKind.ENROLL):
            return f"{self.kind.value}({self.count})"
        return self.kind.value


NO_CHANGE = AllocationDecision(DecisionKind.NO_CHANGE)
RESELECT = AllocationDecision(DecisionKind.RESELECT)


@dataclass
class AllocationState:
    """Per-level allocator state: capacity, fired count, and recent history.

    ``observe`` must be called once per tick before ``step``; it refreshes the
    undershoot/overshoot pair, appends to the DTOF history, and resets the
    zone streak whenever the situation changes (hysteresis is per situation).
    """

    capacity: int
    fired: int = 0
    step_size: int = 1
    window: int = 5
    undershoot: int = 0
    overshoot: int = 0
    dtof_history: deque = field(default_factory=lambda: deque(maxlen=256))
    zone_history: deque = field(default_factory=deque)
    last_situation_id: Optional[str] = None

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")
        if self.step_size < 1:
            raise ValueError("step size must be at least 1")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if not isinstance(self.zone_history, deque) or self.zone_history.maxlen != self.window:
            self.zone_history = deque(self.zone_history, maxlen=self.window)

    def observe(self, situation: Situation) -> Zone:
        if situation.id != self.last_situation_id:
            self.zone_history.clear()
            self.last_situation_id = situation.id
        zone = assess(self.fired, situation, self.capacity)
        self.undershoot = zone.magnitude if zone.kind is ZoneKind.UNSAFE else 0
        self.overshoot = zone.magnitude if zone.kind is ZoneKind.OVERABUNDANT else 0
        self.zone_history.append(zone.kind)
        self.dtof_history.append(dtof(self))
        return zone

    def sustained_overshoot(self) -> bool:
        return (
            len(self.zone_history) == self.window
            and all(k is ZoneKind.OVERABUNDANT for k in self.zone_history)
        )


def dtof(state: AllocationState) -> Fraction:
    """Distance to failure: undershoot normalized by capacity, exact."""
    if state.capacity == 0:
        raise UndefinedCapacityError("DTOF is undefined when capacity is zero")
    return Fraction(state.undershoot, state.capacity)


@dataclass
class ThresholdPolicy:
    """Preconfigured per-situation floors for the freeing decision."""

    floors: dict[str, int] = field(default_factory=dict)
    default: Optional[int] = None


def min_threshold(situation: Situation, policy: ThresholdPolicy) -> int:
    """Floor below which freeing never goes, clamped to the requirement."""
    floor = policy.floors.get(situation.id, policy.default)
    if floor is None:
        raise ThresholdConfigError(
            f"no threshold floor configured for situation '{situation.id}'"
        )
    return min(floor, situation.required)


def step(state: AllocationState, situation: Situation, floor: int,
         better_candidate_available: bool = False,
         idle_capacity: Optional[int] = None) -> AllocationDecision:
    """Per-tick decision for one level, given the freshest observation.

    Undershoot enrolls up to step_size nodes, or reselects when a strictly
    better idle candidate could replace a fired one.  Overshoot frees nodes
    only after the situation has been stably overabundant for a full window,
    and never below the floor.
    """
    if idle_capacity is None:
        idle_capacity = state.capacity - state.fired
    if state.undershoot > 0:
        if better_candidate_available:
            return RESELECT
        count = min(state.step_size, state.undershoot, idle_capacity)
        return AllocationDecision(DecisionKind.ENROLL, count) if count >= 1 else NO_CHANGE
    if state.overshoot > 0:
        if not situation.stable or not state.sustained_overshoot():
            return NO_CHANGE
        count = min(state.step_size, state.overshoot, state.fired - floor)
        return AllocationDecision(DecisionKind.FREE, count) if count >= 1 else NO_CHANGE
    return NO_CHANGE
