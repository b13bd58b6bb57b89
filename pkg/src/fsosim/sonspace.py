"""Enumeration and counting of every SON a capability matrix admits.

An assignment gives each required role instance a distinct node able to play
it.  Instances of the same role are interchangeable, so assignments are
identified up to relabelling of equal-role instances (multiset semantics) and
emitted in canonical lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .hierarchy import Hierarchy
from .roleflow import Protocol

# Canonical form of one assignment: sorted tuple of (role, node id) pairs.
Assignment = tuple[tuple[str, str], ...]


class UnknownRoleError(ValueError):
    pass


@dataclass
class CapabilityMatrix:
    """Boolean nodes-by-roles matrix stating who may play what."""

    nodes: list[str]
    roles: list[str]
    can_play: list[list[bool]]

    def __post_init__(self):
        if len(self.can_play) != len(self.nodes):
            raise ValueError("capability matrix row count must match node count")
        for row in self.can_play:
            if len(row) != len(self.roles):
                raise ValueError("capability matrix column count must match role count")

    @classmethod
    def from_pairs(cls, nodes, roles, pairs) -> "CapabilityMatrix":
        """Build from an iterable of (node, role) capability pairs."""
        nodes, roles = list(nodes), list(roles)
        allowed = set(pairs)
        matrix = [[(n, r) in allowed for r in roles] for n in nodes]
        return cls(nodes, roles, matrix)

    @classmethod
    def from_hierarchy(cls, h: Hierarchy) -> "CapabilityMatrix":
        nodes = sorted(h.nodes)
        roles = sorted({role for node in h.nodes.values() for role in node.capabilities})
        matrix = [[role in h.nodes[n].capabilities for role in roles] for n in nodes]
        return cls(nodes, roles, matrix)

    def players(self, role: str) -> list[str]:
        """Nodes able to play a role, in node-list order."""
        try:
            column = self.roles.index(role)
        except ValueError:
            raise UnknownRoleError(f"role '{role}' not in capability matrix") from None
        return [n for n, row in zip(self.nodes, self.can_play) if row[column]]


def _role_blocks(matrix: CapabilityMatrix, protocol: Protocol) -> list[tuple[str, int, list[str]]]:
    """(role, multiplicity, sorted capable nodes) per role, sorted by role id."""
    blocks = []
    for role in sorted(protocol.required_roles):
        count = protocol.required_roles[role]
        blocks.append((role, count, sorted(matrix.players(role))))
    return blocks


def enumerate_assignments(matrix: CapabilityMatrix, protocol: Protocol) -> list[Assignment]:
    """All distinct assignments, in canonical lexicographic order.

    An empty protocol yields exactly one empty assignment, which keeps the
    count multiplicative over independent role blocks.
    """
    blocks = _role_blocks(matrix, protocol)
    out: list[Assignment] = []

    def extend(block_index: int, used: set[str], acc: list[tuple[str, str]]):
        if block_index == len(blocks):
            out.append(tuple(acc))
            return
        role, count, players = blocks[block_index]
        available = [n for n in players if n not in used]
        for chosen in combinations(available, count):
            for node in chosen:
                used.add(node)
            acc.extend((role, node) for node in chosen)
            extend(block_index + 1, used, acc)
            del acc[len(acc) - count:]
            for node in chosen:
                used.discard(node)

    extend(0, set(), [])
    return out


def count_assignments(matrix: CapabilityMatrix, protocol: Protocol) -> int:
    """Number of distinct assignments, without materializing the list."""
    blocks = _role_blocks(matrix, protocol)

    def tally(block_index: int, used: set[str]) -> int:
        if block_index == len(blocks):
            return 1
        role, count, players = blocks[block_index]
        available = [n for n in players if n not in used]
        if len(available) < count:
            return 0
        total = 0
        for chosen in combinations(available, count):
            used.update(chosen)
            total += tally(block_index + 1, used)
            used.difference_update(chosen)
        return total

    return tally(0, set())


def swap_edges(assignments: list[Assignment]) -> list[tuple[int, int]]:
    """Pairs of assignment indices that differ in exactly one role's node.

    Two assignments are adjacent when the symmetric difference of their
    (role, node) pairs is a single pair on each side, both for the same role.
    """
    edges = []
    as_sets = [set(a) for a in assignments]
    for i in range(len(assignments)):
        for j in range(i + 1, len(assignments)):
            only_i = as_sets[i] - as_sets[j]
            only_j = as_sets[j] - as_sets[i]
            if len(only_i) == 1 and len(only_j) == 1:
                (role_i, _), (role_j, _) = next(iter(only_i)), next(iter(only_j))
                if role_i == role_j:
                    edges.append((i, j))
    return edges
