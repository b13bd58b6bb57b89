"""Scenario files: the declarative timeline driving a simulation run.

A scenario bundles the context universe, the hierarchy spec, protocol and
situation definitions, an event timeline, the energy budget, and the knobs of
the allocator and of the enrollment memory.  Everything is plain JSON with
stable field names; see the README for the schema.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .allocation import Situation, ThresholdPolicy
from .classification import BehaviorClass, ContextUniverse
from .hierarchy import Hierarchy, HierarchyError, HierarchySpec, build
from .roleflow import EnergyBudget, Protocol


class ScenarioError(ValueError):
    """Scenario validation failure, naming the first offending entity."""


class EventKind(Enum):
    CONTEXT_CHANGE = "context_change"
    SITUATION_SET = "situation_set"
    CATASTROPHE = "catastrophe"


@dataclass(frozen=True)
class Event:
    at_tick: int
    kind: EventKind
    level: Optional[int] = None
    figure: Optional[str] = None
    situation_id: Optional[str] = None
    epicenter: Optional[str] = None
    figures: frozenset[str] = frozenset()
    magnitude: int = 1

    def __post_init__(self):
        if self.at_tick < 0:
            raise ScenarioError("event tick must be non-negative")
        if self.kind is EventKind.CATASTROPHE and self.magnitude < 1:
            raise ScenarioError("catastrophe magnitude must be at least 1")


DEFAULT_BEHAVIOR_COSTS = {
    BehaviorClass.RANDOM: 1.0,
    BehaviorClass.PURPOSEFUL_NON_TELEOLOGICAL: 2.0,
    BehaviorClass.TELEOLOGICAL_NON_EXTRAPOLATORY: 4.0,
    BehaviorClass.EXTRAPOLATORY: 8.0,
}


@dataclass
class AllocatorConfig:
    step_size: int = 1
    window: int = 5
    thresholds: ThresholdPolicy = field(default_factory=lambda: ThresholdPolicy(default=0))


@dataclass
class KnowledgeConfig:
    enabled: bool = True
    reward: float = 0.1
    penalty: float = 0.5
    default_score: float = 0.5
    recurrence_threshold: int = 3


@dataclass
class Scenario:
    name: str
    universe: ContextUniverse
    hierarchy_spec: HierarchySpec
    protocols: dict[str, Protocol]
    situations: dict[str, Situation]
    events: list[Event]
    budget_initial: float = 1000.0
    allocator: AllocatorConfig = field(default_factory=AllocatorConfig)
    knowledge: KnowledgeConfig = field(default_factory=KnowledgeConfig)
    behavior_costs: dict[BehaviorClass, float] = field(
        default_factory=lambda: dict(DEFAULT_BEHAVIOR_COSTS)
    )
    seed: int = 0
    horizon: int = 1
    repair_delay: int = 10
    max_depth: int = 16

    def build_hierarchy(self) -> Hierarchy:
        """Fresh hierarchy (fresh node objects) so each run owns its state."""
        return build(
            HierarchySpec.from_dict(self.hierarchy_spec.to_dict(), self.universe)
        )

    def make_budget(self) -> EnergyBudget:
        return EnergyBudget(initial=self.budget_initial)

    def validate(self) -> list[str]:
        """All scenario-level consistency problems, first offender first."""
        problems = []
        if self.horizon < 1:
            problems.append("horizon: must be at least 1 tick")
        if self.budget_initial < 0:
            problems.append("budget: must be non-negative")
        costs = [self.behavior_costs.get(b) for b in BehaviorClass]
        if any(c is None for c in costs):
            problems.append("behavior_costs: every behavior class needs a cost")
        elif not all(a < b for a, b in zip(costs, costs[1:])):
            problems.append("behavior_costs: costs must strictly increase with complexity")

        try:
            h = self.build_hierarchy()
        except HierarchyError as exc:
            problems.append(f"hierarchy: {exc}")
            h = None
        if len(self.hierarchy_spec.levels) > self.max_depth:
            problems.append(
                f"hierarchy: depth {len(self.hierarchy_spec.levels)} exceeds "
                f"the configured maximum of {self.max_depth}"
            )

        for sid, situation in sorted(self.situations.items()):
            for pid in situation.protocols:
                if pid not in self.protocols:
                    problems.append(
                        f"situation '{sid}': references unknown protocol '{pid}'"
                    )
        previous = -1
        for i, event in enumerate(self.events):
            if event.at_tick < previous:
                problems.append(f"events[{i}]: timeline is not sorted by tick")
            previous = event.at_tick
            problems.extend(self._check_event(i, event, h))
        return problems

    def _check_event(self, i, event, h) -> list[str]:
        problems = []
        label = f"events[{i}]"
        if event.kind is EventKind.SITUATION_SET:
            if event.situation_id not in self.situations:
                problems.append(f"{label}: unknown situation '{event.situation_id}'")
            if h is not None and (event.level is None or not (0 <= event.level <= h.top_index)):
                problems.append(f"{label}: unknown level {event.level}")
            elif h is not None and event.situation_id in self.situations:
                situation = self.situations[event.situation_id]
                capacity = len(h.level(event.level).members)
                if situation.required > capacity:
                    problems.append(
                        f"{label}: situation '{event.situation_id}' requires "
                        f"{situation.required} nodes but level {event.level} has {capacity}"
                    )
        elif event.kind is EventKind.CONTEXT_CHANGE:
            if event.figure not in self.universe.figures:
                problems.append(f"{label}: unknown context figure '{event.figure}'")
            if h is not None and (event.level is None or not (0 <= event.level <= h.top_index)):
                problems.append(f"{label}: unknown level {event.level}")
        elif event.kind is EventKind.CATASTROPHE:
            if h is not None and event.epicenter not in h.nodes:
                problems.append(f"{label}: unknown epicenter node '{event.epicenter}'")
            unknown = event.figures - self.universe.figures
            if unknown:
                problems.append(
                    f"{label}: unknown context figures {sorted(unknown)}"
                )
        return problems


def _parse_event(entry: dict) -> Event:
    kind = EventKind(entry["kind"])
    return Event(
        at_tick=int(entry["at"]),
        kind=kind,
        level=entry.get("level"),
        figure=entry.get("figure"),
        situation_id=entry.get("situation"),
        epicenter=entry.get("epicenter"),
        figures=frozenset(entry.get("figures", [])),
        magnitude=int(entry.get("magnitude", 1)),
    )


def from_dict(data: dict) -> Scenario:
    """Parse a scenario from its JSON object form."""
    try:
        universe = ContextUniverse(frozenset(data.get("universe", [])))
        spec = HierarchySpec.from_dict(data["hierarchy"], universe)
        protocols = {}
        for entry in data.get("protocols", []):
            protocols[entry["id"]] = Protocol(
                id=entry["id"],
                required_roles=Counter(entry.get("roles", {})),
                priority=int(entry.get("priority", 0)),
                execution_cost=float(entry.get("execution_cost", 1.0)),
            )
        situations = {}
        for sid, entry in data.get("situations", {}).items():
            situations[sid] = Situation(
                id=sid,
                required=int(entry.get("required", 0)),
                stable=bool(entry.get("stable", False)),
                relevant_figures=frozenset(entry.get("figures", [])),
                protocols=tuple(entry.get("protocols", [])),
            )
        events = sorted(
            (_parse_event(e) for e in data.get("events", [])),
            key=lambda e: e.at_tick,
        )
        alloc = data.get("allocator", {})
        thresholds = alloc.get("thresholds", {})
        knowledge = data.get("knowledge", {})
        behavior_costs = dict(DEFAULT_BEHAVIOR_COSTS)
        for name, cost in data.get("behavior_costs", {}).items():
            behavior_costs[BehaviorClass.from_name(name)] = float(cost)
        return Scenario(
            name=data.get("name", "scenario"),
            universe=universe,
            hierarchy_spec=spec,
            protocols=protocols,
            situations=situations,
            events=events,
            budget_initial=float(data.get("budget", 1000.0)),
            allocator=AllocatorConfig(
                step_size=int(alloc.get("step_size", 1)),
                window=int(alloc.get("window", 5)),
                thresholds=ThresholdPolicy(
                    floors={k: int(v) for k, v in thresholds.get("per_situation", {}).items()},
                    default=(
                        int(thresholds["default"]) if "default" in thresholds else 0
                    ),
                ),
            ),
            knowledge=KnowledgeConfig(
                enabled=bool(knowledge.get("enabled", True)),
                reward=float(knowledge.get("reward", 0.1)),
                penalty=float(knowledge.get("penalty", 0.5)),
                default_score=float(knowledge.get("default_score", 0.5)),
                recurrence_threshold=int(knowledge.get("recurrence_threshold", 3)),
            ),
            behavior_costs=behavior_costs,
            seed=int(data.get("seed", 0)),
            horizon=int(data.get("horizon", 1)),
            repair_delay=int(data.get("repair_delay", 10)),
            max_depth=int(data.get("max_depth", 16)),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def load(path) -> Scenario:
    """Load and parse a scenario JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from exc
    return from_dict(data)


def to_dict(scenario: Scenario) -> dict:
    """Serialize a scenario back to its JSON object form."""
    return {
        "name": scenario.name,
        "seed": scenario.seed,
        "horizon": scenario.horizon,
        "budget": scenario.budget_initial,
        "repair_delay": scenario.repair_delay,
        "universe": sorted(scenario.universe.figures),
        "hierarchy": scenario.hierarchy_spec.to_dict(),
        "protocols": [
            {
                "id": p.id,
                "roles": {r: c for r, c in sorted(p.required_roles.items())},
                "priority": p.priority,
                "execution_cost": p.execution_cost,
            }
            for _, p in sorted(scenario.protocols.items())
        ],
        "situations": {
            sid: {
                "required": s.required,
                "stable": s.stable,
                "figures": sorted(s.relevant_figures),
                "protocols": list(s.protocols),
            }
            for sid, s in sorted(scenario.situations.items())
        },
        "events": [_event_to_dict(e) for e in scenario.events],
        "allocator": {
            "step_size": scenario.allocator.step_size,
            "window": scenario.allocator.window,
            "thresholds": {
                "per_situation": dict(sorted(scenario.allocator.thresholds.floors.items())),
                "default": scenario.allocator.thresholds.default,
            },
        },
        "knowledge": {
            "enabled": scenario.knowledge.enabled,
            "reward": scenario.knowledge.reward,
            "penalty": scenario.knowledge.penalty,
            "default_score": scenario.knowledge.default_score,
            "recurrence_threshold": scenario.knowledge.recurrence_threshold,
        },
        "behavior_costs": {
            b.name.lower(): c for b, c in sorted(scenario.behavior_costs.items())
        },
    }


def _event_to_dict(event: Event) -> dict:
    out = {"at": event.at_tick, "kind": event.kind.value}
    if event.level is not None:
        out["level"] = event.level
    if event.figure is not None:
        out["figure"] = event.figure
    if event.situation_id is not None:
        out["situation"] = event.situation_id
    if event.epicenter is not None:
        out["epicenter"] = event.epicenter
    if event.figures:
        out["figures"] = sorted(event.figures)
    if event.kind is EventKind.CATASTROPHE:
        out["magnitude"] = event.magnitude
    return out
