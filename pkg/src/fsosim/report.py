"""Emission of run outputs: delimited traces, a JSON summary, and figures.

CSV files are byte-deterministic for a given scenario, seed, and flag set:
fixed column order, LF line endings, and repr-stable number formatting.
Figures are rendered to PNG next to the CSVs from the same traces.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .simulation import MetricsReport

ALLOCATOR_COLUMNS = [
    "tick", "level", "situation", "required", "fired",
    "undershoot", "overshoot", "dtof", "decision",
]
EVENT_COLUMNS = [
    "tick", "kind", "level", "origin", "target", "protocol",
    "signature", "levels_spanned", "figures", "outcome", "detail",
]
ENERGY_COLUMNS = ["tick", "remaining", "spent", "debits"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in columns])


def write_events_csv(report: MetricsReport, path):
    _write_csv(Path(path), EVENT_COLUMNS, report.event_rows)


def write_allocator_csv(report: MetricsReport, path):
    _write_csv(Path(path), ALLOCATOR_COLUMNS, report.allocator_rows)


def write_energy_csv(report: MetricsReport, path):
    _write_csv(Path(path), ENERGY_COLUMNS, report.energy_rows)


def write_report_json(report: MetricsReport, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.summary(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_scores_csv(report: MetricsReport, path):
    """Score snapshot: one (node, role, score) row per known pair."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["node", "role", "score"])
        if report.scores is not None:
            for (node, role), score in sorted(report.scores.scores.items()):
                writer.writerow([node, role, repr(score)])


def write_outputs(report: MetricsReport, out_dir, dump_scores: bool = False,
                  figures: bool = True) -> list[Path]:
    """Write every artifact of a run into a directory; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "events.csv", out / "allocator.csv", out / "energy.csv",
             out / "report.json"]
    write_events_csv(report, paths[0])
    write_allocator_csv(report, paths[1])
    write_energy_csv(report, paths[2])
    write_report_json(report, paths[3])
    if dump_scores and report.scores is not None:
        scores_path = out / "scores.csv"
        write_scores_csv(report, scores_path)
        paths.append(scores_path)
    if figures:
        paths.extend(render_figures(report, out))
    return paths


def render_figures(report: MetricsReport, out_dir) -> list[Path]:
    """Render the allocator and energy traces as PNG files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    paths = []
    metadata = {"Software": "fso-sim"}

    levels = sorted({row.level for row in report.allocator_rows})
    if levels:
        fig, axes = plt.subplots(
            len(levels), 1, figsize=(8, 2.2 * len(levels)), sharex=True, squeeze=False
        )
        for ax, level in zip(axes[:, 0], levels):
            rows = [r for r in report.allocator_rows if r.level == level]
            ticks = [r.tick for r in rows]
            ax.step(ticks, [r.fired for r in rows], where="post", label="fired")
            ax.step(ticks, [r.required for r in rows], where="post",
                    linestyle="--", label="required")
            twin = ax.twinx()
            twin.plot(ticks, [r.dtof for r in rows], color="tab:red",
                      alpha=0.6, label="dtof")
            twin.set_ylim(0, 1.05)
            twin.set_ylabel("dtof")
            ax.set_ylabel(f"level {level}")
            ax.legend(loc="upper left", fontsize=8)
        axes[-1, 0].set_xlabel("tick")
        fig.suptitle(f"{report.scenario_name}: allocation per level")
        fig.tight_layout()
        path = out / "allocator.png"
        fig.savefig(path, dpi=100, metadata=metadata)
        plt.close(fig)
        paths.append(path)

    if report.energy_rows:
        fig, ax = plt.subplots(figsize=(8, 3))
        ticks = [r.tick for r in report.energy_rows]
        ax.plot(ticks, [r.remaining for r in report.energy_rows], label="remaining")
        spent = [r.spent for r in report.energy_rows]
        ax.bar(ticks, spent, color="tab:orange", alpha=0.5, label="spent per tick")
        ax.set_xlabel("tick")
        ax.set_ylabel("energy units")
        ax.legend(loc="best", fontsize=8)
        fig.suptitle(f"{report.scenario_name}: energy budget")
        fig.tight_layout()
        path = out / "energy.png"
        fig.savefig(path, dpi=100, metadata=metadata)
        plt.close(fig)
        paths.append(path)
    return paths
