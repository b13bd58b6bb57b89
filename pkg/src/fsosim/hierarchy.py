"""Nested compositional hierarchy of nodes with per-level canons.

Levels are indexed from 0 (atomic leaves) upward.  Every node is a member of
exactly one level; the containment map links each non-top node to its parent
one level up, forming a forest rooted at the top level.  Each level above 0
designates a canon: the node that represents the whole level one level up.
For intermediate levels the canon is a member of the parent level; the top
level's canon is one of its own members and stands for the whole system.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .classification import BehaviorClass, PerceptionSet, SystemicFeatures


class HierarchyError(ValueError):
    """Raised by build() when a spec violates a structural invariant."""


class NoCanonError(LookupError):
    """Raised when punctualizing level 0 or a level without a canon."""


class NodeState(Enum):
    IDLE = "idle"
    ENROLLED = "enrolled"
    FAILED = "failed"


@dataclass
class Node:
    """An agent: role capabilities, feature profile, energy costs, position.

    ``state`` is runtime bookkeeping owned by a single simulation run; all
    other fields are fixed once the hierarchy is built.
    """

    id: str
    capabilities: frozenset[str] = frozenset()
    features: Optional[SystemicFeatures] = None
    energy_cost_profile: Optional[dict[BehaviorClass, float]] = None
    depends_on: frozenset[str] = frozenset()
    state: NodeState = NodeState.IDLE

    def can_play(self, role: str) -> bool:
        return role in self.capabilities


@dataclass
class Level:
    index: int
    members: list[str]
    canon: Optional[str] = None


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    message: str
    severity: str = "error"  # "error" | "warning"

    def __str__(self):
        return f"[{self.severity}] {self.rule}: {self.message}"


@dataclass
class LevelSpec:
    index: int
    members: list[str]
    canon: Optional[str] = None


@dataclass
class HierarchySpec:
    """Declarative description of a hierarchy, as found in scenario files."""

    levels: list[LevelSpec]
    nodes: dict[str, Node]
    containment: dict[str, str]  # child id -> parent id

    @classmethod
    def from_dict(cls, data: dict, universe) -> "HierarchySpec":
        from .classification import SystemicClass

        nodes = {}
        for node_id, nd in data.get("nodes", {}).items():
            organs = nd.get("organs", {})

            def organ(name):
                value = organs.get(name)
                return SystemicClass.from_name(value) if value else None

            costs = None
            if nd.get("costs"):
                costs = {
                    BehaviorClass.from_name(k): float(v) for k, v in nd["costs"].items()
                }
            nodes[node_id] = Node(
                id=node_id,
                capabilities=frozenset(nd.get("capabilities", [])),
                features=SystemicFeatures(
                    perception=universe.subset(nd.get("perception", [])),
                    analytics=organ("analytics"),
                    planning=organ("planning"),
                    execution=organ("execution"),
                    knowledge=organ("knowledge"),
                ),
                energy_cost_profile=costs,
                depends_on=frozenset(nd.get("depends_on", [])),
            )
        levels = [
            LevelSpec(index=lv["index"], members=list(lv["members"]), canon=lv.get("canon"))
            for lv in data.get("levels", [])
        ]
        return cls(levels=levels, nodes=nodes, containment=dict(data.get("containment", {})))

    def to_dict(self) -> dict:
        out_nodes = {}
        for node_id, node in sorted(self.nodes.items()):
            organs = {
                name: cls.name.lower()
                for name, cls in node.features.organs().items()
                if cls is not None
            }
            entry = {
                "capabilities": sorted(node.capabilities),
                "perception": sorted(node.features.perception.figures),
            }
            if organs:
                entry["organs"] = organs
            if node.depends_on:
                entry["depends_on"] = sorted(node.depends_on)
            if node.energy_cost_profile:
                entry["costs"] = {
                    k.name.lower(): v for k, v in sorted(node.energy_cost_profile.items())
                }
            out_nodes[node_id] = entry
        levels = []
        for lv in self.levels:
            entry = {"index": lv.index, "members": list(lv.members)}
            if lv.canon is not None:
                entry["canon"] = lv.canon
            levels.append(entry)
        return {
            "levels": levels,
            "nodes": out_nodes,
            "containment": dict(sorted(self.containment.items())),
        }


@dataclass
class Hierarchy:
    """Validated hierarchy: levels, node table, containment forest.

    The structure is never mutated in place; reconfiguration (for instance
    permanentification) builds a new Hierarchy value.  Node ``state`` fields
    are the only runtime-mutable part and belong to whichever run owns them.
    """

    levels: list[Level]
    nodes: dict[str, Node]
    containment: dict[str, str]
    _children: dict[str, list[str]] = field(default_factory=dict, repr=False, compare=False)
    _level_of: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._children:
            for child, parent in self.containment.items():
                self._children.setdefault(parent, []).append(child)
            for kids in self._children.values():
                kids.sort()
        if not self._level_of:
            for level in self.levels:
                for member in level.members:
                    self._level_of[member] = level.index

    @property
    def top_index(self) -> int:
        return self.levels[-1].index

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def level(self, index: int) -> Level:
        return self.levels[index]

    def level_of(self, node_id: str) -> int:
        return self._level_of[node_id]

    def children_of(self, node_id: str) -> list[str]:
        return list(self._children.get(node_id, []))

    def members_at(self, index: int) -> list[Node]:
        return [self.nodes[m] for m in self.levels[index].members]

    def aggregate_perception(self, node_id: str) -> frozenset[str]:
        """Figures perceived by a node or anything it transitively contains."""
        figures = set(self.nodes[node_id].features.perception.figures)
        stack = self.children_of(node_id)
        while stack:
            current = stack.pop()
            figures |= self.nodes[current].features.perception.figures
            stack.extend(self.children_of(current))
        return frozenset(figures)

    def canon_of(self, index: int) -> Optional[Node]:
        canon_id = self.levels[index].canon
        return self.nodes[canon_id] if canon_id else None

    def to_spec(self) -> HierarchySpec:
        return HierarchySpec(
            levels=[LevelSpec(lv.index, list(lv.members), lv.canon) for lv in self.levels],
            nodes=dict(self.nodes),
            containment=dict(self.containment),
        )

    def reset_states(self):
        for node in self.nodes.values():
            node.state = NodeState.IDLE


def validate(h: Hierarchy) -> list[Violation]:
    """Check every structural invariant; returns an empty list when all hold.

    depends_on cycles are reported as warnings (mutual dependence is
    physically plausible); everything else is an error.
    """
    violations = []
    seen_levels: dict[str, int] = {}

    for position, level in enumerate(h.levels):
        if level.index != position:
            violations.append(
                Violation("level-indexing", str(level.index),
                          f"level at position {position} has index {level.index}")
            )
        for member in level.members:
            if member in seen_levels:
                violations.append(
                    Violation("single-level-membership", member,
                              f"node '{member}' is a member of levels "
                              f"{seen_levels[member]} and {level.index}")
                )
            seen_levels[member] = level.index
            if member not in h.nodes:
                violations.append(
                    Violation("unknown-member", member,
                              f"level {level.index} lists undeclared node '{member}'")
                )

    for node_id in h.nodes:
        if node_id not in seen_levels:
            violations.append(
                Violation("unplaced-node", node_id,
                          f"node '{node_id}' does not appear in any level")
            )

    top = h.levels[-1].index if h.levels else -1
    for level in h.levels:
        if level.index == 0:
            if level.canon is not None:
                violations.append(
                    Violation("leaf-level-canon", str(level.index),
                              "level 0 holds atomic constituents and takes no canon")
                )
            continue
        if level.canon is None:
            violations.append(
                Violation("missing-canon", str(level.index),
                          f"level {level.index} must designate a canon")
            )
            continue
        home = top if level.index == top else level.index + 1
        expected = h.levels[home].members if home < len(h.levels) else []
        if level.canon not in expected:
            violations.append(
                Violation("canon-placement", level.canon,
                          f"canon '{level.canon}' of level {level.index} is not a "
                          f"member of level {home}")
            )

    for child, parent in h.containment.items():
        if child not in h.nodes or parent not in h.nodes:
            violations.append(
                Violation("dangling-containment", child,
                          f"containment edge {child} -> {parent} references an unknown node")
            )
            continue
        if child in seen_levels and parent in seen_levels:
            if seen_levels[parent] != seen_levels[child] + 1:
                violations.append(
                    Violation("containment-level", child,
                              f"parent of '{child}' must sit one level above it")
                )
    for level in h.levels:
        if level.index == top:
            continue
        for member in level.members:
            if member not in h.containment:
                violations.append(
                    Violation("missing-parent", member,
                              f"non-top node '{member}' has no containment parent")
                )

    for node_id, node in sorted(h.nodes.items()):
        for dep in node.depends_on:
            if dep not in h.nodes:
                violations.append(
                    Violation("dangling-depends-on", node_id,
                              f"node '{node_id}' depends on unknown node '{dep}'")
                )
    violations.extend(_dependency_cycle_warnings(h))
    return violations


def _dependency_cycle_warnings(h: Hierarchy) -> list[Violation]:
    color: dict[str, int] = {}

    def visit(node_id, trail):
        color[node_id] = 1
        for dep in sorted(h.nodes[node_id].depends_on):
            if dep not in h.nodes:
                continue
            if color.get(dep) == 1:
                cycle = trail[trail.index(dep):] if dep in trail else [node_id, dep]
                yield Violation(
                    "depends-on-cycle", dep,
                    "mutual dependency involving: " + " -> ".join(cycle + [dep]),
                    severity="warning",
                )
            elif color.get(dep, 0) == 0:
                yield from visit(dep, trail + [dep])
        color[node_id] = 2

    out = []
    for node_id in sorted(h.nodes):
        if color.get(node_id, 0) == 0:
            out.extend(visit(node_id, [node_id]))
    return out


def build(spec: HierarchySpec) -> Hierarchy:
    """Construct and validate a Hierarchy from a spec.

    Raises HierarchyError naming the first offending node when any
    error-severity invariant fails; warnings never block construction.
    """
    if not spec.levels:
        raise HierarchyError("hierarchy spec declares no levels")
    seen: set[str] = set()
    for level in spec.levels:
        for member in level.members:
            if member in seen:
                raise HierarchyError(f"duplicate node id '{member}'")
            seen.add(member)
    h = Hierarchy(
        levels=[Level(lv.index, list(lv.members), lv.canon) for lv in spec.levels],
        nodes=dict(spec.nodes),
        containment=dict(spec.containment),
    )
    errors = [v for v in validate(h) if v.severity == "error"]
    if errors:
        raise HierarchyError(str(errors[0]))
    return h


def punctualize(h: Hierarchy, level_index: int) -> Node:
    """Return the canon standing for an entire level, perception aggregated.

    The returned node is a copy whose perception set is the union of the
    members' effective (subtree-aggregated) perception; the hierarchy itself
    is left untouched.  Level 0 and canonless levels cannot be punctualized.
    """
    if level_index == 0:
        raise NoCanonError("level 0 holds atomic constituents and has no canon")
    level = h.level(level_index)
    if level.canon is None:
        raise NoCanonError(f"level {level_index} has no canon")
    canon = h.nodes[level.canon]
    figures: set[str] = set()
    for member in level.members:
        figures |= h.aggregate_perception(member)
    universe = canon.features.perception.universe
    features = dataclasses.replace(
        canon.features, perception=PerceptionSet(frozenset(figures), universe)
    )
    return dataclasses.replace(canon, features=features)


def systemic_levels(h: Hierarchy) -> list[Level]:
    """Levels in ascending index order."""
    return sorted(h.levels, key=lambda lv: lv.index)
