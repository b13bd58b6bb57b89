"""Enrollment memory: scores, SON recurrence, permanentification.

Scores remember how well each node played each role.  Success pulls a score
toward 1 by a fixed fraction of the remaining headroom; failure decays it
multiplicatively toward 0, so scores stay in [0, 1] by construction.  A
tracker counts how often the same SON signature resurfaces; once a signature
recurs often enough, the hierarchy is reconfigured with a permanent node that
blackboxes the whole SON at the lowest level it spanned.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field

from .classification import PerceptionSet, SystemicFeatures
from .hierarchy import Hierarchy, Level, Node, NodeState
from .roleflow import SON, ExecutionOutcome

DEFAULT_REWARD = 0.1
DEFAULT_PENALTY = 0.5
DEFAULT_SCORE = 0.5


@dataclass(frozen=True)
class ScoreLedger:
    """Map of (node, role) to a score in [0, 1]; unseen pairs read the default."""

    scores: dict[tuple[str, str], float] = field(default_factory=dict)
    default_score: float = DEFAULT_SCORE
    reward: float = DEFAULT_REWARD
    penalty: float = DEFAULT_PENALTY

    def get(self, node_id: str, role: str) -> float:
        return self.scores.get((node_id, role), self.default_score)


def record_outcome(ledger: ScoreLedger, son: SON, outcome: ExecutionOutcome) -> ScoreLedger:
    """Reward or penalize every (node, role) pair of a dissolved SON.

    Success: score += reward * (1 - score).  Anything else: score *= penalty.
    Returns a new ledger; the input is left untouched.
    """
    scores = dict(ledger.scores)
    for (role, _), node_id in son.assignment.items():
        score = scores.get((node_id, role), ledger.default_score)
        if outcome.is_success:
            score = score + ledger.reward * (1.0 - score)
        else:
            score = ledger.penalty * score
        scores[(node_id, role)] = score
    return dataclasses.replace(ledger, scores=scores)


def rank(ledger: ScoreLedger, role: str, candidates: list[str]) -> list[str]:
    """Candidates ordered best first: score descending, id ascending on ties."""
    return sorted(candidates, key=lambda n: (-ledger.get(n, role), n))


@dataclass(frozen=True)
class RecurrenceTracker:
    """Counts successful resurfacings of identical SON signatures."""

    counts: dict[str, int] = field(default_factory=dict)
    threshold: int = 3

    def __post_init__(self):
        if self.threshold < 2:
            raise ValueError("a recurrence threshold below 2 is meaningless")


def observe_son(tracker: RecurrenceTracker, son: SON) -> tuple[RecurrenceTracker, bool]:
    """Count one successful dissolution; report whether the SON now recurs."""
    counts = dict(tracker.counts)
    counts[son.signature] = counts.get(son.signature, 0) + 1
    return (
        dataclasses.replace(tracker, counts=counts),
        counts[son.signature] >= tracker.threshold,
    )


def permanent_node_id(signature: str) -> str:
    """Stable id for the permanent node encoding a SON signature."""
    return "perm-" + hashlib.sha256(signature.encode("utf-8")).hexdigest()[:10]


def permanentify(h: Hierarchy, son: SON) -> Hierarchy:
    """Reconfigure the hierarchy with a permanent node blackboxing the SON.

    The new node can play every role the SON covered and is placed at the
    lowest level the SON spanned, contained under the same parent as that
    level's first contributing node.  Idempotent: if the signature's node
    already exists, the hierarchy is returned unchanged.
    """
    if not son.assignment:
        raise ValueError("cannot permanentify a SON with no assigned nodes")
    node_id = permanent_node_id(son.signature)
    if node_id in h.nodes:
        return h

    target = min(son.levels_spanned)
    roles = frozenset(role for role, _ in son.assignment)
    members_here = sorted(n for n in son.node_ids if h.level_of(n) == target)
    perception_figures: set[str] = set()
    universe = None
    for member in son.node_ids:
        perception = h.node(member).features.perception
        universe = perception.universe
        perception_figures |= perception.figures
    node = Node(
        id=node_id,
        capabilities=roles,
        features=SystemicFeatures(
            perception=PerceptionSet(frozenset(perception_figures), universe)
        ),
        state=NodeState.IDLE,
    )

    levels = [Level(lv.index, list(lv.members), lv.canon) for lv in h.levels]
    levels[target].members.append(node_id)
    nodes = dict(h.nodes)
    nodes[node_id] = node
    containment = dict(h.containment)
    anchor = members_here[0] if members_here else None
    if target < h.top_index and anchor is not None and anchor in containment:
        containment[node_id] = containment[anchor]
    return Hierarchy(levels=levels, nodes=nodes, containment=containment)
