"""SON-space enumeration against the ordered-tuple brute-force oracle."""

import random
from collections import Counter

import pytest

from fsosim.roleflow import Protocol
from fsosim.sonspace import (
    CapabilityMatrix,
    UnknownRoleError,
    count_assignments,
    enumerate_assignments,
    swap_edges,
)

from oracles import son_space_oracle


def proto(roles, pid="p"):
    return Protocol(id=pid, required_roles=Counter(roles))


def nine_node_matrix():
    """Nine nodes, five roles: three play role r0, one each plays r1..r3,
    three play r4."""
    nodes = [f"n{i}" for i in range(9)]
    roles = [f"r{i}" for i in range(5)]
    pairs = {("n0", "r0"), ("n1", "r0"), ("n2", "r0"),
             ("n3", "r1"), ("n4", "r2"), ("n5", "r3"),
             ("n6", "r4"), ("n7", "r4"), ("n8", "r4")}
    return CapabilityMatrix.from_pairs(nodes, roles, pairs), pairs


def test_empty_protocol_yields_one_empty_assignment():
    matrix = CapabilityMatrix.from_pairs(["n0"], ["r0"], {("n0", "r0")})
    assert enumerate_assignments(matrix, proto({})) == [()]
    assert count_assignments(matrix, proto({})) == 1


def test_unfillable_role_yields_empty_list():
    matrix = CapabilityMatrix.from_pairs(["n0"], ["r0", "r1"], {("n0", "r0")})
    assert enumerate_assignments(matrix, proto({"r1": 1})) == []
    assert count_assignments(matrix, proto({"r1": 1})) == 0


def test_unknown_role_raises():
    matrix = CapabilityMatrix.from_pairs(["n0"], ["r0"], {("n0", "r0")})
    with pytest.raises(UnknownRoleError):
        count_assignments(matrix, proto({"zzz": 1}))


def test_nine_node_five_role_space():
    matrix, pairs = nine_node_matrix()
    p = proto({f"r{i}": 1 for i in range(5)})
    expected = son_space_oracle(
        matrix.nodes, [(f"r{i}", 1) for i in range(5)], pairs
    )
    got = enumerate_assignments(matrix, p)
    assert set(got) == expected
    assert count_assignments(matrix, p) == len(expected) == 9


def test_two_capable_nodes_single_role():
    matrix = CapabilityMatrix.from_pairs(
        ["n0", "n1"], ["r"], {("n0", "r"), ("n1", "r")}
    )
    assert count_assignments(matrix, proto({"r": 1})) == 2


def test_multiset_role_counts_unordered_pairs():
    pairs = {("n0", "r"), ("n1", "r")}
    matrix = CapabilityMatrix.from_pairs(["n0", "n1"], ["r"], pairs)
    expected = son_space_oracle(["n0", "n1"], [("r", 2)], pairs)
    assert len(expected) == 1
    assert count_assignments(matrix, proto({"r": 2})) == 1


def _random_instance(rng):
    node_count = rng.randint(1, 12)
    role_count = rng.randint(1, 6)
    nodes = [f"n{i}" for i in range(node_count)]
    roles = [f"r{i}" for i in range(role_count)]
    pairs = {
        (n, r) for n in nodes for r in roles if rng.random() < 0.45
    }
    matrix = CapabilityMatrix.from_pairs(nodes, roles, pairs)
    wanted = rng.sample(roles, rng.randint(1, min(4, role_count)))
    required = []
    budget = 6  # keeps the ordered-tuple oracle tractable
    for role in wanted:
        count = rng.randint(1, min(3, budget))
        required.append((role, count))
        budget -= count
        if budget == 0:
            break
    return matrix, pairs, required


def test_randomized_instances_match_oracle():
    rng = random.Random(2024)
    for _ in range(60):
        matrix, pairs, required = _random_instance(rng)
        p = proto(dict(required))
        expected = son_space_oracle(matrix.nodes, required, pairs)
        got = enumerate_assignments(matrix, p)
        assert set(got) == expected
        assert count_assignments(matrix, p) == len(expected)
        assert got == sorted(got)  # canonical order


def test_adding_capability_never_decreases_count():
    rng = random.Random(99)
    for _ in range(30):
        matrix, pairs, required = _random_instance(rng)
        p = proto(dict(required))
        before = count_assignments(matrix, p)
        missing = [
            (n, r) for n in matrix.nodes for r in matrix.roles if (n, r) not in pairs
        ]
        if not missing:
            continue
        extra = rng.choice(missing)
        grown = CapabilityMatrix.from_pairs(matrix.nodes, matrix.roles, pairs | {extra})
        assert count_assignments(grown, p) >= before


def test_node_permutation_preserves_count_and_canonical_order():
    rng = random.Random(5)
    matrix, pairs, required = _random_instance(rng)
    p = proto(dict(required))
    shuffled = list(matrix.nodes)
    rng.shuffle(shuffled)
    permuted = CapabilityMatrix.from_pairs(shuffled, matrix.roles, pairs)
    assert count_assignments(permuted, p) == count_assignments(matrix, p)
    assert enumerate_assignments(permuted, p) == enumerate_assignments(matrix, p)


def test_swap_edges_join_single_role_changes():
    matrix, _ = nine_node_matrix()
    p = proto({f"r{i}": 1 for i in range(5)})
    assignments = enumerate_assignments(matrix, p)
    edges = swap_edges(assignments)
    for i, j in edges:
        diff = set(assignments[i]) ^ set(assignments[j])
        assert len(diff) == 2
        assert len({role for role, _ in diff}) == 1
    # each of the 9 assignments differs from another by one role swap
    touched = {i for e in edges for i in e}
    assert touched == set(range(9))
