"""Deterministic discrete-event simulation kernel.

Each tick applies timeline events, ripples catastrophes through the
dependency graph, publishes notifications up the chain of canons, runs the
per-level allocator and the role-flow enrollment, executes active SONs
against the energy budget, and finally applies knowledge updates.  A run is
a pure function of the scenario (seed included): replaying it reproduces
every trace byte for byte.
"""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional

from . import knowledge as km
from .allocation import (
    IDLE_SITUATION,
    AllocationDecision,
    AllocationState,
    DecisionKind,
    Situation,
    dtof,
    min_threshold,
    step,
)
from .classification import BehaviorClass, behavior_ceiling, classify
from .hierarchy import Hierarchy, Node, NodeState
from .roleflow import (
    EnergyBudget,
    ExecutionOutcome,
    OutcomeKind,
    Protocol,
    RoleFlowEngine,
    SON,
)
from .scenario import EventKind, Scenario


def ripple(h: Hierarchy, epicenter: Node, figures, magnitude: int) -> set[str]:
    """Nodes reached by a shock: epicenter plus dependents within N hops.

    Breadth-first over reversed dependency edges, visiting each node at most
    once, so termination is immediate even with mutual dependencies.
    """
    return set(ripple_hops(h, epicenter.id, magnitude))


def ripple_hops(h: Hierarchy, epicenter_id: str, magnitude: int) -> dict[str, int]:
    """Reached node ids mapped to their hop distance from the epicenter."""
    dependents: dict[str, list[str]] = {}
    for node_id, node in h.nodes.items():
        for dep in node.depends_on:
            dependents.setdefault(dep, []).append(node_id)
    hops = {epicenter_id: 0}
    queue = deque([epicenter_id])
    while queue:
        current = queue.popleft()
        if hops[current] >= magnitude:
            continue
        for dependent in sorted(dependents.get(current, [])):
            if dependent not in hops:
                hops[dependent] = hops[current] + 1
                queue.append(dependent)
    return hops


def publish(h: Hierarchy, origin: Node) -> list[tuple[int, Node]]:
    """Deliver a notification to the origin level's canon and every canon above.

    Returns (level, canon) pairs in ascending level order; a canon never
    receives its own notification.
    """
    deliveries = []
    origin_level = h.level_of(origin.id)
    for index in range(origin_level, h.top_index + 1):
        canon = h.canon_of(index)
        if canon is not None and canon.id != origin.id:
            deliveries.append((index, canon))
    return deliveries


def choose_behavior(node: Node, node_class: BehaviorClass, budget: EnergyBudget,
                    costs: dict[BehaviorClass, float]) -> Optional[BehaviorClass]:
    """Most complex affordable behavior within the node's class, or None.

    Per-node cost profiles override the scenario-wide cost table.
    """
    profile = node.energy_cost_profile or costs
    for behavior in sorted(BehaviorClass, reverse=True):
        if behavior > node_class:
            continue
        if budget.can_afford(profile[behavior]):
            return behavior
    return None


@dataclass
class AllocatorRow:
    tick: int
    level: int
    situation: str
    required: int
    fired: int
    undershoot: int
    overshoot: int
    dtof: float
    decision: str


@dataclass
class EventRow:
    tick: int
    kind: str
    level: str = ""
    origin: str = ""
    target: str = ""
    protocol: str = ""
    signature: str = ""
    levels_spanned: str = ""
    figures: str = ""
    outcome: str = ""
    detail: str = ""


@dataclass
class EnergyRow:
    tick: int
    remaining: float
    spent: float
    debits: int


@dataclass
class LatencyRecord:
    level: int
    situation: str
    protocol: str
    set_at: int
    served_at: Optional[int] = None

    @property
    def latency(self) -> Optional[int]:
        if self.served_at is None:
            return None
        return self.served_at - self.set_at


@dataclass
class MetricsReport:
    """Everything a run measured, ready for CSV/JSON/figure emission."""

    scenario_name: str
    seed: int
    horizon: int
    allocator_rows: list[AllocatorRow] = field(default_factory=list)
    event_rows: list[EventRow] = field(default_factory=list)
    energy_rows: list[EnergyRow] = field(default_factory=list)
    latencies: list[LatencyRecord] = field(default_factory=list)
    escalations_per_level: dict[int, int] = field(default_factory=dict)
    permanentifications: list[dict] = field(default_factory=list)
    son_log: list[dict] = field(default_factory=list)
    budget: Optional[EnergyBudget] = None
    scores: Optional[km.ScoreLedger] = None
    final_hierarchy: Optional[Hierarchy] = None

    def summary(self) -> dict:
        sons_formed = sum(1 for row in self.son_log if row["event"] == "formed")
        return {
            "scenario": self.scenario_name,
            "seed": self.seed,
            "horizon": self.horizon,
            "energy": {
                "initial": self.budget.initial,
                "remaining": self.budget.remaining,
                "spent": self.budget.initial - self.budget.remaining,
            },
            "sons_formed": sons_formed,
            "escalations_per_level": {
                str(k): v for k, v in sorted(self.escalations_per_level.items())
            },
            "permanentifications": self.permanentifications,
            "reaction_latencies": [
                {
                    "level": rec.level,
                    "situation": rec.situation,
                    "protocol": rec.protocol,
                    "set_at": rec.set_at,
                    "served_at": rec.served_at,
                    "latency": rec.latency,
                }
                for rec in self.latencies
            ],
        }


class _Run:
    """Mutable state of one simulation run; single-threaded by construction."""

    def __init__(self, scenario: Scenario):
        problems = scenario.validate()
        if problems:
            from .scenario import ScenarioError

            raise ScenarioError(problems[0])
        self.scenario = scenario
        self.hierarchy = scenario.build_hierarchy()
        self.budget = scenario.make_budget()
        self.rng = random.Random(scenario.seed)
        self.memoryless = not scenario.knowledge.enabled
        self.scores = None if self.memoryless else km.ScoreLedger(
            default_score=scenario.knowledge.default_score,
            reward=scenario.knowledge.reward,
            penalty=scenario.knowledge.penalty,
        )
        self.tracker = km.RecurrenceTracker(threshold=scenario.knowledge.recurrence_threshold)
        self.engine = RoleFlowEngine(self.hierarchy, scores=self.scores)
        self.situations: dict[int, Situation] = {}
        self.fired: dict[int, set[str]] = {
            lv.index: set() for lv in self.hierarchy.levels
        }
        self.allocators: dict[int, AllocationState] = {
            lv.index: AllocationState(
                capacity=len(lv.members),
                step_size=scenario.allocator.step_size,
                window=scenario.allocator.window,
            )
            for lv in self.hierarchy.levels
        }
        self.serving: dict[tuple[int, str], SON] = {}
        self.failed_until: dict[str, int] = {}
        self.permanentified: set[str] = set()
        self.report = MetricsReport(
            scenario_name=scenario.name, seed=scenario.seed, horizon=scenario.horizon
        )
        self._dissolved_this_tick: list[tuple[SON, ExecutionOutcome]] = []
        self._notifications: list[tuple[str, frozenset]] = []

    # -- logging helpers -------------------------------------------------

    def _log(self, tick, kind, **kw):
        self.report.event_rows.append(EventRow(tick=tick, kind=kind, **kw))

    def _log_son(self, tick, event, son, outcome=""):
        spanned = ";".join(str(i) for i in sorted(son.levels_spanned))
        self._log(
            tick,
            f"son_{event}",
            protocol=son.protocol_id,
            signature=son.signature,
            levels_spanned=spanned,
            outcome=outcome,
            origin=son.id,
        )
        self.report.son_log.append(
            {
                "tick": tick,
                "event": event,
                "son": son.id,
                "protocol": son.protocol_id,
                "signature": son.signature,
                "levels_spanned": sorted(son.levels_spanned),
                "outcome": outcome,
            }
        )

    # -- tick phases -----------------------------------------------------

    def _repair(self, tick):
        for node_id in sorted(self.failed_until):
            if self.failed_until[node_id] <= tick:
                node = self.hierarchy.node(node_id)
                if node.state is NodeState.FAILED:
                    node.state = NodeState.IDLE
                del self.failed_until[node_id]
                self._log(tick, "node_repaired", origin=node_id,
                          level=str(self.hierarchy.level_of(node_id)))

    def _apply_events(self, tick):
        for event in self.scenario.events:
            if event.at_tick != tick:
                continue
            if event.kind is EventKind.SITUATION_SET:
                self._apply_situation(tick, event)
            elif event.kind is EventKind.CONTEXT_CHANGE:
                self._apply_context_change(tick, event)
            elif event.kind is EventKind.CATASTROPHE:
                self._apply_catastrophe(tick, event)

    def _apply_situation(self, tick, event):
        level = event.level
        situation = self.scenario.situations[event.situation_id]
        current = self.situations.get(level, IDLE_SITUATION)
        self._log(tick, "situation_set", level=str(level), detail=situation.id)
        if situation.id == current.id:
            return
        for (lv, pid), son in sorted(self.serving.items()):
            if lv == level and son.active:
                self._dissolve(son, tick, ExecutionOutcome(OutcomeKind.SUCCESS))
        self.situations[level] = situation
        for pid in situation.protocols:
            self.report.latencies.append(
                LatencyRecord(level=level, situation=situation.id, protocol=pid, set_at=tick)
            )

    def _apply_context_change(self, tick, event):
        self._log(tick, "context_change", level=str(event.level), figures=event.figure)
        for node in self.hierarchy.members_at(event.level):
            if event.figure in node.features.perception.figures:
                self._notifications.append((node.id, frozenset([event.figure])))

    def _apply_catastrophe(self, tick, event):
        self._log(
            tick,
            "catastrophe",
            origin=event.epicenter,
            level=str(self.hierarchy.level_of(event.epicenter)),
            figures=";".join(sorted(event.figures)),
            detail=f"magnitude={event.magnitude}",
        )
        hops = ripple_hops(self.hierarchy, event.epicenter, event.magnitude)
        for node_id in sorted(hops):
            node = self.hierarchy.node(node_id)
            hop = hops[node_id]
            perceives = bool(node.features.perception.figures & event.figures)
            draw = self.rng.random()
            fails = draw < 1.0 / (hop + 1)
            if perceives:
                self._notifications.append((node_id, event.figures))
                if node.state is not NodeState.FAILED:
                    self._respond(tick, node)
            if fails and node.state is not NodeState.FAILED:
                self._fail_node(tick, node, hop)

    def _respond(self, tick, node):
        ceiling = behavior_ceiling(classify(node.features))
        behavior = choose_behavior(node, ceiling, self.budget, self.scenario.behavior_costs)
        if behavior is None:
            self._log(tick, "behavior", origin=node.id, outcome="abstain")
            return
        profile = node.energy_cost_profile or self.scenario.behavior_costs
        self.budget.debit(tick, node.id, profile[behavior], f"behavior:{behavior.name.lower()}")
        self._log(tick, "behavior", origin=node.id, outcome=behavior.name.lower(),
                  detail=f"cost={profile[behavior]}")

    def _fail_node(self, tick, node, hop):
        node.state = NodeState.FAILED
        self.failed_until[node.id] = tick + self.scenario.repair_delay
        level = self.hierarchy.level_of(node.id)
        self.fired[level].discard(node.id)
        self._log(tick, "node_failed", origin=node.id, level=str(level),
                  detail=f"hop={hop}")
        for (lv, pid), son in sorted(self.serving.items()):
            if son.active and node.id in son.assignment.values():
                self._dissolve(son, tick, ExecutionOutcome(OutcomeKind.FAILED, at_tick=tick))

    def _deliver_notifications(self, tick):
        ordered = sorted(
            self._notifications,
            key=lambda item: (self.hierarchy.level_of(item[0]), item[0]),
        )
        self._notifications = []
        for origin_id, figures in ordered:
            origin = self.hierarchy.node(origin_id)
            for level, canon in publish(self.hierarchy, origin):
                perceived = bool(self.hierarchy.aggregate_perception(canon.id) & figures)
                self._log(
                    tick,
                    "notification",
                    origin=origin_id,
                    target=canon.id,
                    level=str(level),
                    figures=";".join(sorted(figures)),
                    outcome="perceived" if perceived else "unperceived",
                )

    # -- allocator -------------------------------------------------------

    def _available_for_fire(self, level) -> list[str]:
        members = self.hierarchy.level(level).members
        return sorted(
            m for m in members
            if m not in self.fired[level]
            and self.hierarchy.node(m).state is not NodeState.FAILED
        )

    def _node_score(self, node_id) -> float:
        if self.scores is None:
            return 0.0
        entries = [v for (nid, _), v in self.scores.scores.items() if nid == node_id]
        if not entries:
            return self.scores.default_score
        return sum(entries) / len(entries)

    def _better_candidate(self, level, idle: list[str]) -> Optional[tuple[str, str]]:
        """(idle node, fired node) when a strictly better swap exists."""
        if self.scores is None or not idle or not self.fired[level]:
            return None
        best_idle = max(idle, key=lambda n: (self._node_score(n), n))
        worst_fired = min(sorted(self.fired[level]),
                          key=lambda n: (self._node_score(n), n))
        if self._node_score(best_idle) > self._node_score(worst_fired):
            return (best_idle, worst_fired)
        return None

    def _allocator_step(self, tick, level):
        state = self.allocators[level]
        situation = self.situations.get(level, IDLE_SITUATION)
        state.fired = len(self.fired[level])
        state.observe(situation)
        floor = min_threshold(situation, self.scenario.allocator.thresholds)
        idle = self._available_for_fire(level)
        swap = self._better_candidate(level, idle) if state.undershoot > 0 else None
        decision = step(
            state,
            situation,
            floor,
            better_candidate_available=swap is not None,
            idle_capacity=len(idle),
        )
        self.report.allocator_rows.append(
            AllocatorRow(
                tick=tick,
                level=level,
                situation=situation.id,
                required=situation.required,
                fired=state.fired,
                undershoot=state.undershoot,
                overshoot=state.overshoot,
                dtof=float(dtof(state)),
                decision=str(decision),
            )
        )
        self._apply_decision(level, decision, idle, swap)

    def _apply_decision(self, level, decision: AllocationDecision, idle, swap):
        if decision.kind is DecisionKind.ENROLL:
            ranked = sorted(idle, key=lambda n: (-self._node_score(n), n))
            for node_id in ranked[: decision.count]:
                self.fired[level].add(node_id)
        elif decision.kind is DecisionKind.FREE:
            # free lowest score first; ties release the highest id
            by_rank = sorted(self.fired[level], key=lambda n: (-self._node_score(n), n))
            for node_id in by_rank[len(by_rank) - decision.count:]:
                self.fired[level].discard(node_id)
        elif decision.kind is DecisionKind.RESELECT and swap is not None:
            idle_node, fired_node = swap
            self.fired[level].discard(fired_node)
            self.fired[level].add(idle_node)

    # -- role flow --------------------------------------------------------

    def _active_protocols(self, level) -> list[Protocol]:
        situation = self.situations.get(level, IDLE_SITUATION)
        protos = [self.scenario.protocols[pid] for pid in situation.protocols]
        return sorted(protos, key=lambda p: (-p.priority, p.id))

    def _roleflow_step(self, tick, level):
        for protocol in self._active_protocols(level):
            key = (level, protocol.id)
            current = self.serving.get(key)
            if current is not None and current.active:
                continue
            result = self.engine.enroll(protocol, level)
            if result.complete:
                son = self.engine.form_son(protocol, result, tick)
                self._log(tick, "enroll_complete", level=str(level), protocol=protocol.id)
            else:
                missing = ";".join(
                    f"{role}:{count}" for role, count in sorted(result.missing.items())
                )
                self._log(tick, "role_exception", level=str(level),
                          protocol=protocol.id, detail=missing)
                self.report.escalations_per_level[level] = (
                    self.report.escalations_per_level.get(level, 0) + 1
                )
                escalation = self.engine.escalate(protocol, result, tick)
                if not escalation.resolved:
                    left = ";".join(
                        f"{role}:{count}"
                        for role, count in sorted(escalation.pending.missing.items())
                    )
                    self._log(tick, "escalation_pending", level=str(level),
                              protocol=protocol.id, detail=left)
                    continue
                son = escalation.son
                self._log(
                    tick,
                    "escalation_resolved",
                    level=str(level),
                    protocol=protocol.id,
                    signature=son.signature,
                    levels_spanned=";".join(str(i) for i in sorted(son.levels_spanned)),
                )
            self.serving[key] = son
            self._log_son(tick, "formed", son)
            for record in self.report.latencies:
                if (record.level == level and record.protocol == protocol.id
                        and record.served_at is None):
                    record.served_at = tick

    # -- execution and knowledge ------------------------------------------

    def _execute_sons(self, tick):
        active = sorted(
            (son for son in self.serving.values() if son.active),
            key=lambda s: int(s.id.split("-")[1]),
        )
        for son in active:
            if not self.engine.execute_tick(son, self.budget, tick):
                self._dissolve(son, tick, ExecutionOutcome(OutcomeKind.STARVED, at_tick=tick))

    def _dissolve(self, son, tick, outcome: ExecutionOutcome):
        if not son.active:
            return
        self.engine.dissolve(son, tick, outcome)
        self._log_son(tick, "dissolved", son, outcome=outcome.kind.value)
        self._dissolved_this_tick.append((son, outcome))

    def _knowledge_step(self, tick):
        for son, outcome in self._dissolved_this_tick:
            if self.scores is not None:
                self.scores = km.record_outcome(self.scores, son, outcome)
                self.engine.scores = self.scores
            if outcome.is_success and not self.memoryless:
                self.tracker, recurred = km.observe_son(self.tracker, son)
                if recurred and son.signature not in self.permanentified:
                    self._permanentify(tick, son)
        self._dissolved_this_tick = []

    def _permanentify(self, tick, son):
        new_h = km.permanentify(self.hierarchy, son)
        if new_h is self.hierarchy:
            return
        self.permanentified.add(son.signature)
        self.hierarchy = new_h
        self.engine.hierarchy = new_h
        target = min(son.levels_spanned)
        node_id = km.permanent_node_id(son.signature)
        self.allocators[target].capacity += 1
        self._log(tick, "permanentified", level=str(target), origin=node_id,
                  signature=son.signature, protocol=son.protocol_id)
        self.report.permanentifications.append(
            {
                "tick": tick,
                "node": node_id,
                "level": target,
                "signature": son.signature,
                "protocol": son.protocol_id,
            }
        )

    def _energy_row(self, tick):
        replayed = self.budget.replay()
        if abs(replayed - self.budget.remaining) > 1e-9 or self.budget.remaining < 0:
            raise RuntimeError(
                f"energy conservation violated at tick {tick}: "
                f"remaining={self.budget.remaining} replayed={replayed}"
            )
        spent = sum(cost for t, _, cost, _ in self.budget.ledger if t == tick)
        debits = sum(1 for t, _, _, _ in self.budget.ledger if t == tick)
        self.report.energy_rows.append(
            EnergyRow(tick=tick, remaining=self.budget.remaining, spent=spent, debits=debits)
        )

    def execute(self) -> MetricsReport:
        for tick in range(self.scenario.horizon):
            self._repair(tick)
            self._apply_events(tick)
            self._deliver_notifications(tick)
            for level in sorted(self.allocators):
                self._allocator_step(tick, level)
                self._roleflow_step(tick, level)
            self._execute_sons(tick)
            self._knowledge_step(tick)
            self._energy_row(tick)
        self.report.budget = self.budget
        self.report.scores = self.scores
        self.report.final_hierarchy = self.hierarchy
        return self.report


def run(scenario: Scenario) -> MetricsReport:
    """Execute a scenario from tick 0 to its horizon and collect all metrics."""
    return _Run(scenario).execute()
