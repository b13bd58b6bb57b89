"""Shared fixtures: universes, hierarchy builders, and scenario factories."""

from __future__ import annotations

import pytest

from fsosim.classification import ContextUniverse, SystemicClass, SystemicFeatures
from fsosim.hierarchy import HierarchySpec, LevelSpec, Node, build


@pytest.fixture
def universe():
    return ContextUniverse(frozenset({
        "temperature", "humidity", "motion", "smoke", "acceleration",
        "light", "sound", "pressure", "battery", "presence",
    }))


def make_node(universe, node_id, capabilities=(), perception=(), analytics=None,
              planning=None, execution=None, knowledge=None, depends_on=()):
    return Node(
        id=node_id,
        capabilities=frozenset(capabilities),
        features=SystemicFeatures(
            perception=universe.subset(perception),
            analytics=analytics,
            planning=planning,
            execution=execution,
            knowledge=knowledge,
        ),
        depends_on=frozenset(depends_on),
    )


def ls_spec(universe):
    """Four-tier smart-building shape: sensors, rooms, houses, building.

    Sensors live at level 0 under room nodes, rooms under the house, the
    house under the building.  Canons: the house stands for the room level,
    the building for the house level and for itself at the top.
    """
    low = SystemicClass.THERMOSTAT
    nodes = {}
    containment = {}
    sensors = []
    room_figures = {
        "room-a": ["motion", "temperature"],
        "room-b": ["smoke", "light"],
    }
    for room, figures in room_figures.items():
        for i, figure in enumerate(figures):
            sensor_id = f"{room}-s{i}"
            sensors.append(sensor_id)
            nodes[sensor_id] = make_node(
                universe, sensor_id,
                capabilities=["sense"],
                perception=[figure],
                execution=low,
            )
            containment[sensor_id] = room
    for room in room_figures:
        nodes[room] = make_node(
            universe, room,
            capabilities=["coordinate"],
            perception=["presence"],
            analytics=low, execution=low,
        )
        containment[room] = "house"
    nodes["house"] = make_node(
        universe, "house",
        capabilities=["coordinate", "escalate"],
        perception=["pressure"],
        analytics=SystemicClass.CELL, planning=SystemicClass.CELL,
        execution=SystemicClass.CELL,
    )
    containment["house"] = "building"
    nodes["building"] = make_node(
        universe, "building",
        capabilities=["govern"],
        perception=["battery"],
        analytics=SystemicClass.ANIMAL, planning=SystemicClass.ANIMAL,
        execution=SystemicClass.ANIMAL, knowledge=SystemicClass.ANIMAL,
    )
    return HierarchySpec(
        levels=[
            LevelSpec(0, sorted(sensors)),
            LevelSpec(1, sorted(room_figures), canon="house"),
            LevelSpec(2, ["house"], canon="building"),
            LevelSpec(3, ["building"], canon="building"),
        ],
        nodes=nodes,
        containment=containment,
    )


@pytest.fixture
def ls_hierarchy(universe):
    return build(ls_spec(universe))


def ls_scenario_dict(universe, **overrides):
    """Runnable scenario over the four-tier building; events default empty."""
    data = {
        "name": "ls-default",
        "seed": 42,
        "horizon": 10,
        "budget": 500.0,
        "universe": sorted(universe.figures),
        "hierarchy": ls_spec(universe).to_dict(),
        "protocols": [
            {"id": "alert", "roles": {"sense": 1, "coordinate": 1},
             "priority": 1, "execution_cost": 1.0},
            {"id": "watch", "roles": {"sense": 2}, "priority": 0,
             "execution_cost": 1.0},
        ],
        "situations": {
            "night-walk": {"required": 3, "stable": False,
                           "figures": ["motion"], "protocols": ["watch"]},
            "sleep": {"required": 1, "stable": True, "figures": [],
                      "protocols": []},
            "incident": {"required": 2, "stable": False,
                         "figures": ["smoke"], "protocols": ["alert"]},
        },
        "events": [],
        "allocator": {"step_size": 1, "window": 3,
                      "thresholds": {"per_situation": {"sleep": 1}, "default": 0}},
        "knowledge": {"enabled": True, "reward": 0.1, "penalty": 0.5,
                      "recurrence_threshold": 3},
    }
    data.update(overrides)
    return data
