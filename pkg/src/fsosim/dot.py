"""Deterministic DOT renderings of hierarchies and SON spaces."""

from __future__ import annotations

from .hierarchy import Hierarchy
from .roleflow import Protocol
from .sonspace import CapabilityMatrix, enumerate_assignments, swap_edges


def hierarchy_dot(h: Hierarchy) -> str:
    """Containment forest as a digraph, nodes and edges sorted by id."""
    lines = ["digraph hierarchy {"]
    for node_id in sorted(h.nodes):
        level = h.level_of(node_id)
        lines.append(f'  "{node_id}" [label="{node_id}\\nlevel {level}"];')
    for child in sorted(h.containment):
        lines.append(f'  "{child}" -> "{h.containment[child]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def son_space_dot(matrix: CapabilityMatrix, protocol: Protocol) -> str:
    """SON-space graph: one node per assignment, edges join single-role swaps."""
    assignments = enumerate_assignments(matrix, protocol)
    lines = ["graph son_space {"]
    for i, assignment in enumerate(assignments):
        label = ",".join(f"{role}={node}" for role, node in assignment)
        lines.append(f'  a{i} [label="{label}"];')
    for i, j in swap_edges(assignments):
        lines.append(f"  a{i} -- a{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
