"""Horizontal and vertical system classification.

A system is described horizontally by five abilities: perceiving change,
analyzing its consequences, planning a response, executing the plan, and
retaining knowledge.  Perception is modelled as a subset of a finite universe
of context figures; the other four abilities are organs labelled with a
systemic class.  This module provides the perception-set algebra (partial
order, environmental fit), the class mapping for feature profiles, and a
depth-bounded comparison of two hierarchically organized systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional


class UniverseMismatchError(ValueError):
    """Raised when two perception sets from different universes are compared."""


class SystemicClass(IntEnum):
    """Coarse system classes, totally ordered by complexity."""

    OBJECT = 0
    THERMOSTAT = 1
    SERVOMECHANISM = 2
    CELL = 3
    PLANT = 4
    ANIMAL = 5
    HUMAN_BEING = 6

    @classmethod
    def from_name(cls, name: str) -> "SystemicClass":
        return cls[name.strip().upper()]


class BehaviorClass(IntEnum):
    """Behavioral strategies, ordered by complexity (and therefore cost)."""

    RANDOM = 0
    PURPOSEFUL_NON_TELEOLOGICAL = 1
    TELEOLOGICAL_NON_EXTRAPOLATORY = 2
    EXTRAPOLATORY = 3

    @classmethod
    def from_name(cls, name: str) -> "BehaviorClass":
        return cls[name.strip().upper()]


# Most complex behavior a node of a given systemic class may exercise.
BEHAVIOR_CEILING: dict[SystemicClass, BehaviorClass] = {
    SystemicClass.OBJECT: BehaviorClass.RANDOM,
    SystemicClass.THERMOSTAT: BehaviorClass.PURPOSEFUL_NON_TELEOLOGICAL,
    SystemicClass.SERVOMECHANISM: BehaviorClass.TELEOLOGICAL_NON_EXTRAPOLATORY,
    SystemicClass.CELL: BehaviorClass.TELEOLOGICAL_NON_EXTRAPOLATORY,
    SystemicClass.PLANT: BehaviorClass.TELEOLOGICAL_NON_EXTRAPOLATORY,
    SystemicClass.ANIMAL: BehaviorClass.EXTRAPOLATORY,
    SystemicClass.HUMAN_BEING: BehaviorClass.EXTRAPOLATORY,
}


class OrderRelation(Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class ContextUniverse:
    """The finite set of all context figures observable in a scenario.

    Figures are plain non-empty string identifiers (e.g. ``"temperature"``).
    """

    figures: frozenset[str]

    def __post_init__(self):
        for fig in self.figures:
            if not fig:
                raise ValueError("context figure ids must be non-empty strings")

    def subset(self, figures) -> "PerceptionSet":
        return PerceptionSet(frozenset(figures), self)

    def full_set(self) -> "PerceptionSet":
        """The perception set of the hypothetical all-perceiving reference system."""
        return PerceptionSet(self.figures, self)


@dataclass(frozen=True)
class PerceptionSet:
    """The context figures a system is able to perceive."""

    figures: frozenset[str]
    universe: ContextUniverse

    def __post_init__(self):
        extra = self.figures - self.universe.figures
        if extra:
            raise ValueError(
                "perception figures not in universe: %s" % ", ".join(sorted(extra))
            )

    def intersects(self, figures) -> bool:
        return bool(self.figures & frozenset(figures))


@dataclass(frozen=True)
class SystemicFeatures:
    """A feature profile: perception plus four optional labelled organs.

    An absent organ (``None``) is distinct from an organ of the lowest class;
    a system with no planning organ cannot plan at all, while a system with a
    low-class planning organ plans poorly.
    """

    perception: PerceptionSet
    analytics: Optional[SystemicClass] = None
    planning: Optional[SystemicClass] = None
    execution: Optional[SystemicClass] = None
    knowledge: Optional[SystemicClass] = None

    def organs(self) -> dict[str, Optional[SystemicClass]]:
        return {
            "analytics": self.analytics,
            "planning": self.planning,
            "execution": self.execution,
            "knowledge": self.knowledge,
        }


@dataclass(frozen=True)
class FitReport:
    """Environmental fit of a system's perception against a deployment context.

    blind_spots: figures the environment exposes but the system cannot see.
    wasted:      figures the system watches that never change in the environment.
    overlap:     figures both share.
    """

    blind_spots: frozenset[str]
    wasted: frozenset[str]
    overlap: frozenset[str]


def _require_shared_universe(a: PerceptionSet, b: PerceptionSet):
    if a.universe != b.universe:
        raise UniverseMismatchError(
            "perception sets belong to different context universes"
        )


def perception_order(a: PerceptionSet, b: PerceptionSet) -> OrderRelation:
    """Compare two perception sets under the strict-subset order.

    Returns LESS when a's figures are a strict subset of b's, GREATER for the
    converse, EQUAL on identical sets, and INCOMPARABLE when neither set
    contains the other.
    """
    _require_shared_universe(a, b)
    if a.figures == b.figures:
        return OrderRelation.EQUAL
    if a.figures < b.figures:
        return OrderRelation.LESS
    if b.figures < a.figures:
        return OrderRelation.GREATER
    return OrderRelation.INCOMPARABLE


def environmental_fit(system: PerceptionSet, environment: PerceptionSet) -> FitReport:
    """Partition system and environment figures into blind spots, waste, overlap."""
    _require_shared_universe(system, environment)
    return FitReport(
        blind_spots=environment.figures - system.figures,
        wasted=system.figures - environment.figures,
        overlap=system.figures & environment.figures,
    )


def _organ_band(features: SystemicFeatures) -> tuple[SystemicClass, SystemicClass]:
    """Band of classes reachable given which organs are present.

    Planning and knowledge gate the upper reaches: without either the system
    tops out at CELL, planning alone admits the organism band up to ANIMAL,
    and only planning plus knowledge open the band up to HUMAN_BEING.
    """
    if features.planning is not None and features.knowledge is not None:
        return (SystemicClass.ANIMAL, SystemicClass.HUMAN_BEING)
    if features.planning is not None:
        return (SystemicClass.PLANT, SystemicClass.ANIMAL)
    return (SystemicClass.THERMOSTAT, SystemicClass.CELL)


def classify(features: SystemicFeatures) -> SystemicClass:
    """Map a feature profile to a systemic class.

    The mapping is a two-key lookup: which organs are present selects a band
    of classes, and the minimum class rank among the present organs refines
    the position inside that band (an organ chain is only as strong as its
    weakest link).  Perception-free profiles are plain objects regardless of
    their organs.  The full table is published in the README.
    """
    if not features.perception.figures:
        return SystemicClass.OBJECT

    present = [c for c in features.organs().values() if c is not None]
    if not present:
        return SystemicClass.THERMOSTAT

    min_rank = min(present)
    low, high = _organ_band(features)

    if high == SystemicClass.CELL:
        if min_rank <= SystemicClass.THERMOSTAT:
            return SystemicClass.THERMOSTAT
        if min_rank <= SystemicClass.SERVOMECHANISM:
            return SystemicClass.SERVOMECHANISM
        return SystemicClass.CELL
    if high == SystemicClass.ANIMAL:
        return SystemicClass.ANIMAL if min_rank >= SystemicClass.ANIMAL else SystemicClass.PLANT
    # Planning and knowledge both present: HUMAN_BEING demands all five
    # features and uniformly rich organs.
    all_five = all(c is not None for c in features.organs().values())
    if all_five and min_rank >= SystemicClass.ANIMAL:
        return SystemicClass.HUMAN_BEING
    return SystemicClass.ANIMAL


def behavior_ceiling(cls: SystemicClass) -> BehaviorClass:
    """Most complex behavioral strategy available to the given class."""
    return BEHAVIOR_CEILING[cls]


def _organ_relation(a: Optional[SystemicClass], b: Optional[SystemicClass]) -> OrderRelation:
    # Absent organs rank below every present one; absent equals absent.
    if a is None and b is None:
        return OrderRelation.EQUAL
    if a is None:
        return OrderRelation.LESS
    if b is None:
        return OrderRelation.GREATER
    if a == b:
        return OrderRelation.EQUAL
    return OrderRelation.LESS if a < b else OrderRelation.GREATER


@dataclass
class FeatureComparison:
    feature: str
    a_value: Optional[str]
    b_value: Optional[str]
    relation: OrderRelation

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "a": self.a_value,
            "b": self.b_value,
            "relation": self.relation.value,
        }


@dataclass
class ComparisonReport:
    """Feature-by-feature comparison of two nodes, recursing into children.

    The child list mirrors the shallower of the two containment structures,
    truncated at the requested depth; children are paired in sorted-id order
    and unpaired ids on either side are listed, not compared.
    """

    a_id: str
    b_id: str
    features: list[FeatureComparison] = field(default_factory=list)
    children: list["ComparisonReport"] = field(default_factory=list)
    a_unpaired: list[str] = field(default_factory=list)
    b_unpaired: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "a": self.a_id,
            "b": self.b_id,
            "features": [f.to_dict() for f in self.features],
            "children": [c.to_dict() for c in self.children],
            "a_unpaired": self.a_unpaired,
            "b_unpaired": self.b_unpaired,
        }


def compare_features(fa: SystemicFeatures, fb: SystemicFeatures) -> list[FeatureComparison]:
    rows = [
        FeatureComparison(
            "perception",
            ",".join(sorted(fa.perception.figures)),
            ",".join(sorted(fb.perception.figures)),
            perception_order(fa.perception, fb.perception),
        )
    ]
    organs_a, organs_b = fa.organs(), fb.organs()
    for name in ("analytics", "planning", "execution", "knowledge"):
        a_val, b_val = organs_a[name], organs_b[name]
        rows.append(
            FeatureComparison(
                name,
                a_val.name.lower() if a_val is not None else None,
                b_val.name.lower() if b_val is not None else None,
                _organ_relation(a_val, b_val),
            )
        )
    return rows


def compare_systems(a, b, depth: int, hierarchy_a=None, hierarchy_b=None) -> ComparisonReport:
    """Compare two nodes feature by feature, descending ``depth`` levels.

    ``a`` and ``b`` are hierarchy nodes.  With depth > 0 the containment
    children of each node are paired in sorted-id order and compared
    recursively; the recursion stops at ``depth`` or where either side runs
    out of children, whichever comes first.
    """
    report = ComparisonReport(a_id=a.id, b_id=b.id, features=compare_features(a.features, b.features))
    if depth <= 0 or hierarchy_a is None or hierarchy_b is None:
        return report
    kids_a = sorted(hierarchy_a.children_of(a.id))
    kids_b = sorted(hierarchy_b.children_of(b.id))
    paired = min(len(kids_a), len(kids_b))
    for ka, kb in zip(kids_a[:paired], kids_b[:paired]):
        report.children.append(
            compare_systems(
                hierarchy_a.node(ka), hierarchy_b.node(kb), depth - 1, hierarchy_a, hierarchy_b
            )
        )
    report.a_unpaired = kids_a[paired:]
    report.b_unpaired = kids_b[paired:]
    return report
