"""Output emission: CSV byte determinism, JSON summary, figure files."""

import json

from fsosim import scenario as scen
from fsosim.report import write_outputs
from fsosim.simulation import run

from conftest import ls_scenario_dict


def _events():
    return [
        {"at": 0, "kind": "situation_set", "level": 0, "situation": "night-walk"},
        {"at": 3, "kind": "catastrophe", "epicenter": "room-a-s0",
         "figures": ["motion"], "magnitude": 1},
        {"at": 5, "kind": "situation_set", "level": 0, "situation": "sleep"},
    ]


def test_outputs_written_and_deterministic(universe, tmp_path):
    data = ls_scenario_dict(universe, horizon=12, events=_events())
    first, second = tmp_path / "a", tmp_path / "b"
    write_outputs(run(scen.from_dict(data)), first, figures=False)
    write_outputs(run(scen.from_dict(data)), second, figures=False)
    for name in ("events.csv", "allocator.csv", "energy.csv", "report.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_report_json_summary_fields(universe, tmp_path):
    data = ls_scenario_dict(universe, horizon=8, events=_events())
    write_outputs(run(scen.from_dict(data)), tmp_path, figures=False)
    summary = json.loads((tmp_path / "report.json").read_text())
    assert summary["scenario"] == "ls-default"
    assert summary["energy"]["initial"] == 500.0
    assert summary["sons_formed"] >= 1
    assert "reaction_latencies" in summary


def test_allocator_csv_replays_dtof(universe, tmp_path):
    from fractions import Fraction
    import csv

    data = ls_scenario_dict(universe, horizon=10, events=_events())
    write_outputs(run(scen.from_dict(data)), tmp_path, figures=False)
    with open(tmp_path / "allocator.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert rows
    capacity = {0: 4, 1: 2, 2: 1, 3: 1}
    for row in rows:
        under = max(0, int(row["required"]) - int(row["fired"]))
        assert under == int(row["undershoot"])
        expected = float(Fraction(under, capacity[int(row["level"])]))
        assert float(row["dtof"]) == expected


def test_scores_dump_present_only_when_asked(universe, tmp_path):
    data = ls_scenario_dict(universe, horizon=6, events=_events())
    report = run(scen.from_dict(data))
    write_outputs(report, tmp_path / "plain", figures=False)
    assert not (tmp_path / "plain" / "scores.csv").exists()
    write_outputs(report, tmp_path / "dumped", dump_scores=True, figures=False)
    text = (tmp_path / "dumped" / "scores.csv").read_text()
    assert text.splitlines()[0] == "node,role,score"
    assert len(text.splitlines()) > 1


def test_figures_rendered_alongside_csv(universe, tmp_path):
    data = ls_scenario_dict(universe, horizon=6, events=_events())
    paths = write_outputs(run(scen.from_dict(data)), tmp_path, figures=True)
    names = {p.name for p in paths}
    assert {"events.csv", "allocator.csv", "energy.csv", "report.json",
            "allocator.png", "energy.png"} <= names
    assert (tmp_path / "allocator.png").stat().st_size > 0
    assert (tmp_path / "energy.png").stat().st_size > 0
