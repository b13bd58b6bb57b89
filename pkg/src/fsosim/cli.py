"""Command-line entry point.

Subcommands: run a scenario, validate one, enumerate a SON space, export DOT
graphs, and compare two nodes.  Machine outputs go to files under the output
directory (overridable with FSO_SIM_OUT); a short human summary goes to
standard output.  Exit codes: 0 clean, 1 bad usage, 2 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import dot, report, scenario as scen, simulation
from .classification import compare_systems
from .roleflow import Protocol
from .sonspace import CapabilityMatrix, count_assignments, enumerate_assignments


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fso-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one or more scenarios")
    run_p.add_argument("scenarios", nargs="+", help="scenario JSON file(s)")
    run_p.add_argument("--scenario", dest="extra_scenarios", action="append",
                       default=[], help=argparse.SUPPRESS)
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--horizon", type=int, default=None, help="override the horizon")
    run_p.add_argument("--out", default=None, help="output directory (default: ./out)")
    run_p.add_argument("--dump-scores", action="store_true",
                       help="also write a scores.csv snapshot")
    run_p.add_argument("--memoryless", action="store_true",
                       help="disable enrollment memory; candidates rank by id")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip PNG figure rendering")
    run_p.add_argument("--jobs", type=int, default=1,
                       help="run scenarios concurrently with this many workers")

    val_p = sub.add_parser("validate", help="validate a scenario without running it")
    val_p.add_argument("scenario", help="scenario JSON file")

    son_p = sub.add_parser("son-space", help="enumerate the SON space of a protocol")
    son_p.add_argument("--scenario", required=True, help="scenario JSON file")
    son_p.add_argument("--protocol", default=None,
                       help="protocol id (default: first by id)")
    son_p.add_argument("--out", default=None,
                       help="write assignments CSV (and DOT with --dot) here")
    son_p.add_argument("--dot", action="store_true", help="also export the swap graph")

    dot_p = sub.add_parser("export-dot", help="export the hierarchy containment graph")
    dot_p.add_argument("--scenario", required=True, help="scenario JSON file")
    dot_p.add_argument("--out", default=None, help="output file (default: stdout)")

    cmp_p = sub.add_parser("compare", help="compare two nodes feature by feature")
    cmp_p.add_argument("--scenario", required=True, help="scenario JSON file")
    cmp_p.add_argument("--a", required=True, help="first node id")
    cmp_p.add_argument("--b", required=True, help="second node id")
    cmp_p.add_argument("--depth", type=int, default=0, help="containment depth to descend")
    cmp_p.add_argument("--out", default=None, help="output file (default: stdout)")
    return parser


def _out_dir(flag_value) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get("FSO_SIM_OUT")
    return Path(env) if env else Path("out")


def _load(path):
    try:
        return scen.load(path)
    except FileNotFoundError:
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        sys.exit(2)
    except scen.ScenarioError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        sys.exit(2)


def _run_one(path, args, out_root, multi):
    loaded = _load(path)
    if args.seed is not None:
        loaded.seed = args.seed
    if args.horizon is not None:
        loaded.horizon = args.horizon
    if args.memoryless:
        loaded.knowledge.enabled = False
    problems = loaded.validate()
    if problems:
        print(f"validation failure: {problems[0]}", file=sys.stderr)
        sys.exit(2)
    result = simulation.run(loaded)
    target = out_root / Path(path).stem if multi else out_root
    paths = report.write_outputs(
        result, target, dump_scores=args.dump_scores and not args.memoryless,
        figures=not args.no_figures,
    )
    summary = result.summary()
    sons = summary["sons_formed"]
    energy = summary["energy"]
    print(
        f"{loaded.name}: {loaded.horizon} ticks, {sons} SONs formed, "
        f"energy {energy['remaining']:g}/{energy['initial']:g} remaining"
    )
    for written in paths:
        print(f"  wrote {written}")


def cmd_run(args) -> int:
    paths = list(args.scenarios) + list(args.extra_scenarios)
    out_root = _out_dir(args.out)
    multi = len(paths) > 1
    if args.jobs > 1 and multi:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, p, args, out_root, multi) for p in paths]
            for future in futures:
                future.result()
    else:
        for path in paths:
            _run_one(path, args, out_root, multi)
    return 0


def cmd_validate(args) -> int:
    loaded = _load(args.scenario)
    problems = loaded.validate()
    if problems:
        print(f"validation failure: {problems[0]}", file=sys.stderr)
        return 2
    print(f"{loaded.name}: scenario is valid")
    return 0


def cmd_son_space(args) -> int:
    loaded = _load(args.scenario)
    if not loaded.protocols:
        print("validation failure: scenario declares no protocols", file=sys.stderr)
        return 2
    pid = args.protocol or sorted(loaded.protocols)[0]
    if pid not in loaded.protocols:
        print(f"validation failure: unknown protocol '{pid}'", file=sys.stderr)
        return 2
    protocol: Protocol = loaded.protocols[pid]
    matrix = CapabilityMatrix.from_hierarchy(loaded.build_hierarchy())
    count = count_assignments(matrix, protocol)
    print(f"protocol {pid}: {count} possible SONs")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        assignments = enumerate_assignments(matrix, protocol)
        csv_path = out / "son_space.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["assignment"])
            for assignment in assignments:
                writer.writerow([";".join(f"{r}={n}" for r, n in assignment)])
        print(f"  wrote {csv_path}")
        if args.dot:
            dot_path = out / "son_space.dot"
            dot_path.write_text(dot.son_space_dot(matrix, protocol), encoding="utf-8")
            print(f"  wrote {dot_path}")
    return 0


def cmd_export_dot(args) -> int:
    loaded = _load(args.scenario)
    text = dot.hierarchy_dot(loaded.build_hierarchy())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_compare(args) -> int:
    loaded = _load(args.scenario)
    h = loaded.build_hierarchy()
    for node_id in (args.a, args.b):
        if node_id not in h.nodes:
            print(f"validation failure: unknown node '{node_id}'", file=sys.stderr)
            return 2
    report_tree = compare_systems(h.node(args.a), h.node(args.b), args.depth, h, h)
    text = json.dumps(report_tree.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": cmd_run,
        "validate": cmd_validate,
        "son-space": cmd_son_space,
        "export-dot": cmd_export_dot,
        "compare": cmd_compare,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
