"""Role-flow protocol engine.

A protocol fires once every required role is filled by a distinct node.  The
engine enrolls candidates level by level: roles are first sought where the
need arose, and any shortfall escalates to the parent level and onward to the
root.  A completed enrollment forms a social overlay network (SON), a
temporary organ possibly spanning several levels, which executes against the
global energy budget until it is dissolved.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .hierarchy import Hierarchy, Node, NodeState


@dataclass(frozen=True)
class Protocol:
    id: str
    required_roles: Counter  # role id -> multiplicity
    priority: int = 0
    execution_cost: float = 1.0  # per enrolled node per tick

    def instances(self) -> list[tuple[str, int]]:
        """Role instances in deterministic order: sorted role id, then index."""
        out = []
        for role in sorted(self.required_roles):
            out.extend((role, i) for i in range(self.required_roles[role]))
        return out


@dataclass
class RoleException:
    """Raised (as a value) when a level cannot fill all required roles."""

    protocol_id: str
    origin_level: int
    missing: Counter

    def __post_init__(self):
        if not self.missing:
            raise ValueError("a role exception must name at least one missing role")


@dataclass
class SON:
    """A trans-hierarchical temporary organ: nodes enrolled to a protocol."""

    id: str
    protocol_id: str
    assignment: dict[tuple[str, int], str]  # (role, instance) -> node id
    levels_spanned: frozenset[int]
    formed_at: int = 0
    execution_cost: float = 1.0
    active: bool = True
    dissolved_at: Optional[int] = None

    @property
    def signature(self) -> str:
        """Canonical, instance-label-independent encoding of who plays what."""
        pairs = sorted((role, node) for (role, _), node in self.assignment.items())
        return self.protocol_id + "::" + ",".join(f"{r}={n}" for r, n in pairs)

    @property
    def node_ids(self) -> list[str]:
        return sorted(set(self.assignment.values()))

    def roles_of(self, node_id: str) -> list[str]:
        return sorted(role for (role, _), nid in self.assignment.items() if nid == node_id)


class OutcomeKind(Enum):
    SUCCESS = "success"
    STARVED = "starved"
    FAILED = "failed"  # an enrolled node failed mid-execution


@dataclass(frozen=True)
class ExecutionOutcome:
    kind: OutcomeKind
    at_tick: Optional[int] = None

    @property
    def is_success(self) -> bool:
        return self.kind is OutcomeKind.SUCCESS


class BudgetError(ValueError):
    pass


@dataclass
class EnergyBudget:
    """Global pool of consumable resources, with a full audit ledger."""

    initial: float
    remaining: Optional[float] = None
    ledger: list[tuple[int, str, float, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.initial < 0:
            raise BudgetError("initial budget must be non-negative")
        if self.remaining is None:
            self.remaining = self.initial

    def can_afford(self, cost: float) -> bool:
        return self.remaining >= cost

    def debit(self, tick: int, node_id: str, cost: float, reason: str):
        if cost < 0:
            raise BudgetError("debit cost must be non-negative")
        if cost > self.remaining:
            raise BudgetError(
                f"debit of {cost} exceeds remaining budget {self.remaining}"
            )
        self.remaining -= cost
        self.ledger.append((tick, node_id, cost, reason))

    def replay(self) -> float:
        """Recompute the remaining budget from the ledger alone."""
        total = 0.0
        for _, _, cost, _ in self.ledger:
            total += cost
        return self.initial - total


@dataclass
class EnrollmentResult:
    """Either a complete assignment or an exception naming the unfilled roles."""

    protocol_id: str
    level_index: int
    assignment: dict[tuple[str, int], str]
    missing: Counter

    @property
    def complete(self) -> bool:
        return not self.missing

    @property
    def exception(self) -> Optional[RoleException]:
        if self.complete:
            return None
        return RoleException(self.protocol_id, self.level_index, Counter(self.missing))


@dataclass
class EscalationResult:
    son: Optional[SON] = None
    pending: Optional[RoleException] = None

    @property
    def resolved(self) -> bool:
        return self.son is not None


@dataclass
class SONRecord:
    son_id: str
    signature: str
    protocol_id: str
    formed_at: int
    dissolved_at: int
    outcome: Optional[ExecutionOutcome]

    @property
    def lifetime(self) -> int:
        return self.dissolved_at - self.formed_at


class RoleFlowEngine:
    """Runs enrollments, escalations, executions and dissolutions for one run.

    ``scores`` is any object with a ``get(node_id, role) -> float`` method
    (see knowledge.ScoreLedger); without one, candidates rank by id alone,
    reproducing memoryless enrollment.
    """

    def __init__(self, hierarchy: Hierarchy, scores=None):
        self.hierarchy = hierarchy
        self.scores = scores
        self.history: list[SONRecord] = []
        self._next_son = 0

    def _score(self, node_id: str, role: str) -> float:
        if self.scores is None:
            return 0.0
        return self.scores.get(node_id, role)

    def _pick(self, role: str, candidates: list[Node]) -> Optional[Node]:
        eligible = [
            n for n in candidates if n.state is NodeState.IDLE and n.can_play(role)
        ]
        if not eligible:
            return None
        eligible.sort(key=lambda n: (-self._score(n.id, role), n.id))
        return eligible[0]

    def _fill(self, protocol: Protocol, missing: Counter, level_index: int,
              assignment: dict[tuple[str, int], str]) -> Counter:
        """Greedily fill missing role instances from one level, reserving nodes."""
        candidates = self.hierarchy.members_at(level_index)
        still_missing = Counter()
        for role in sorted(missing):
            for _ in range(missing[role]):
                chosen = self._pick(role, candidates)
                if chosen is None:
                    still_missing[role] += 1
                    continue
                chosen.state = NodeState.ENROLLED
                index = sum(1 for (r, _) in assignment if r == role)
                assignment[(role, index)] = chosen.id
        return still_missing

    def enroll(self, protocol: Protocol, level_index: int) -> EnrollmentResult:
        """Fill the protocol's roles from idle nodes at one level.

        Picks the highest-scoring capable idle node per role instance (ties
        break on node id); a node holds at most one instance.  Nodes chosen
        for a partial fill stay reserved so that escalation can build on it;
        call rollback() to release them if the attempt is abandoned.
        """
        if level_index < 0 or level_index > self.hierarchy.top_index:
            raise LookupError(f"no level {level_index} in hierarchy")
        assignment: dict[tuple[str, int], str] = {}
        missing = self._fill(protocol, Counter(protocol.required_roles), level_index, assignment)
        return EnrollmentResult(protocol.id, level_index, assignment, missing)

    def escalate(self, protocol: Protocol, result: EnrollmentResult,
                 tick: int = 0) -> EscalationResult:
        """Seek the missing roles level by level above the origin.

        The origin level is never re-searched.  Each visited level merges its
        fills into the partial assignment; if the root is exhausted with roles
        still missing, every reservation is rolled back and the exception is
        reported as pending at the root.
        """
        assignment = dict(result.assignment)
        missing = Counter(result.missing)
        level = result.level_index + 1
        while missing and level <= self.hierarchy.top_index:
            missing = self._fill(protocol, missing, level, assignment)
            level += 1
        if missing:
            self._release(assignment.values())
            return EscalationResult(
                pending=RoleException(protocol.id, self.hierarchy.top_index, missing)
            )
        return EscalationResult(son=self._form(protocol, assignment, tick))

    def form_son(self, protocol: Protocol, result: EnrollmentResult, tick: int = 0) -> SON:
        """Wrap a complete enrollment into a SON."""
        if not result.complete:
            raise ValueError("cannot form a SON from an incomplete enrollment")
        return self._form(protocol, result.assignment, tick)

    def _form(self, protocol: Protocol, assignment, tick: int) -> SON:
        spanned = frozenset(self.hierarchy.level_of(n) for n in assignment.values())
        son = SON(
            id=f"son-{self._next_son}",
            protocol_id=protocol.id,
            assignment=dict(assignment),
            levels_spanned=spanned,
            formed_at=tick,
            execution_cost=protocol.execution_cost,
        )
        self._next_son += 1
        return son

    def _release(self, node_ids):
        for node_id in node_ids:
            node = self.hierarchy.node(node_id)
            if node.state is NodeState.ENROLLED:
                node.state = NodeState.IDLE

    def rollback(self, result: EnrollmentResult):
        """Release the reservations of an abandoned partial enrollment."""
        self._release(result.assignment.values())

    def execute(self, son: SON, budget: EnergyBudget, ticks: int,
                start_tick: int = 1) -> ExecutionOutcome:
        """Debit per-node execution cost for each tick; stop before overdraw.

        Returns STARVED at the first tick whose full debit would push the
        budget below zero; that tick's debit is not applied.
        """
        if ticks < 1:
            raise ValueError("ticks must be >= 1")
        for offset in range(ticks):
            tick = start_tick + offset
            if not self.execute_tick(son, budget, tick):
                return ExecutionOutcome(OutcomeKind.STARVED, at_tick=tick)
        return ExecutionOutcome(OutcomeKind.SUCCESS)

    def execute_tick(self, son: SON, budget: EnergyBudget, tick: int) -> bool:
        """One tick of execution; False (and no debit) when unaffordable."""
        nodes = son.node_ids
        total = son.execution_cost * len(nodes)
        if not budget.can_afford(total):
            return False
        for node_id in nodes:
            budget.debit(tick, node_id, son.execution_cost, f"execute:{son.protocol_id}")
        return True

    def dissolve(self, son: SON, tick: int = 0,
                 outcome: Optional[ExecutionOutcome] = None):
        """Return the SON's nodes to idle and record it in history.

        Dissolving an already-dissolved SON is a no-op.
        """
        if not son.active:
            return
        son.active = False
        son.dissolved_at = tick
        self._release(son.assignment.values())
        self.history.append(
            SONRecord(
                son_id=son.id,
                signature=son.signature,
                protocol_id=son.protocol_id,
                formed_at=son.formed_at,
                dissolved_at=tick,
                outcome=outcome,
            )
        )
