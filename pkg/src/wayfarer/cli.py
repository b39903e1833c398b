"""Command-line entry point.

Subcommands:
  run       execute trials x scenarios with the reference (or replay) stack,
            writing per-episode traces, a summary table (stdout + CSV), and
            figures next to the delimited output
  validate  strict schema + structural checks for fixture/scenario files
  replay    re-render the summary and figure for an existing trace

Exit codes: 0 on success, 1 when any episode ended in adapter_failure,
2 on configuration or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import yamlio
from .adapters import ReplayIntentModel, ReplayJointModel, ReplayLocalPolicy, ReplayLog
from .errors import ParseError, WayfarerError
from .grounding import RuleIntentModel
from .map_service import FixtureMapService
from .orchestrator import EpisodeConfig, run_scenario
from .policy import ArcLocalPolicy, RuleJointModel
from .report import (
    ScenarioOutcome,
    format_table,
    render_episode_figure,
    render_summary_figure,
    summary_rows,
    write_summary_csv,
)
from .scenario import list_builtin_scenarios, load_scenario, resolve_scenario_path
from .trace import read_trace, split_trace
from .validate import fixture_issues, scenario_issues

EXIT_OK = 0
EXIT_EPISODE_FAILURES = 1
EXIT_CONFIG_ERROR = 2


def _parse_overrides(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"--set expects key=value, got {pair!r}")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise ValueError(f"--set {key}: {value!r} is not a number") from None
    return overrides


def _build_adapters(spec: str):
    if spec == "reference":
        return RuleIntentModel(), RuleJointModel(), ArcLocalPolicy()
    if spec.startswith("replay:"):
        log = ReplayLog(spec.split(":", 1)[1])
        return ReplayIntentModel(log), ReplayJointModel(log), ReplayLocalPolicy(log)
    raise ValueError(f"unknown adapter spec {spec!r} (expected 'reference' or 'replay:<path>')")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        if args.trials < 1:
            raise ValueError(f"--trials must be >= 1, got {args.trials}")
        if args.seed < 0:
            raise ValueError(f"--seed must be non-negative, got {args.seed}")
        overrides = _parse_overrides(args.set or [])
        base_cfg = EpisodeConfig().with_overrides(overrides)
        intent_model, joint_model, local_policy = _build_adapters(args.adapter)
        scenarios = [load_scenario(resolve_scenario_path(name)) for name in args.scenarios]
    except (ValueError, FileNotFoundError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    out_dir = Path(args.out)
    trace_dir = out_dir / "traces"
    clients: dict[str, FixtureMapService] = {}
    outcomes: list[ScenarioOutcome] = []
    first_traces: list[tuple[str, Path]] = []

    for scenario in scenarios:
        key = str(scenario.fixture_path)
        if key not in clients:
            try:
                clients[key] = FixtureMapService(scenario.fixture_path)
            except ParseError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG_ERROR
        results = []
        for trial in range(args.trials):
            seed = args.seed + trial
            trace_path = trace_dir / f"{scenario.name}_seed{seed}.jsonl"
            try:
                result = run_scenario(
                    scenario,
                    seed,
                    cfg=base_cfg,
                    intent_model=intent_model,
                    joint_model=joint_model,
                    local_policy=local_policy,
                    map_client=clients[key],
                    trace_path=str(trace_path),
                )
            except (ValueError, WayfarerError) as exc:
                print(f"error: {scenario.name}: {exc}", file=sys.stderr)
                return EXIT_CONFIG_ERROR
            results.append(result)
            if trial == 0:
                first_traces.append((scenario.name, trace_path))
        outcomes.append(ScenarioOutcome(scenario=scenario.name, task=scenario.task, results=tuple(results)))

    rows = summary_rows(outcomes)
    print(format_table(rows))
    write_summary_csv(rows, out_dir / "summary.csv")
    print(f"\ntraces: {trace_dir}")
    print(f"summary: {out_dir / 'summary.csv'}")

    if not args.no_figures:
        fig_dir = out_dir / "figures"
        for name, trace_path in first_traces:
            render_episode_figure(read_trace(trace_path), fig_dir / f"{name}.png")
        render_summary_figure(rows, fig_dir / "success_rate.png")
        print(f"figures: {fig_dir}")

    failed = sum(r["adapter_failure"] for r in rows if r["row_type"] == "scenario")
    return EXIT_EPISODE_FAILURES if failed else EXIT_OK


def _looks_like_fixture(path: Path) -> bool:
    doc = yamlio.load_file(path)
    return isinstance(doc.value, dict) and "pois" in doc.value


def cmd_validate(args: argparse.Namespace) -> int:
    any_issue = False
    for raw in args.paths:
        path = Path(raw)
        try:
            if not path.exists():
                path = resolve_scenario_path(raw)
            if _looks_like_fixture(path):
                issues = fixture_issues(FixtureMapService(path))
            else:
                issues = scenario_issues(load_scenario(path))
        except (ParseError, FileNotFoundError) as exc:
            print(f"{raw}: {exc}")
            any_issue = True
            continue
        if issues:
            any_issue = True
            for issue in issues:
                print(f"{path}: {issue}")
        else:
            print(f"{path}: ok")
    return EXIT_CONFIG_ERROR if any_issue else EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        records = read_trace(args.trace)
        meta, steps, result = split_trace(records)
    except (OSError, StopIteration, ValueError) as exc:
        print(f"error: cannot read trace {args.trace}: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    dest = meta.get("destination") or {}
    print(f"instruction:  {meta.get('instruction', '?')}")
    print(f"destination:  {dest.get('name', '?')} ({dest.get('id', '?')})")
    print(f"rationale:    {meta.get('rationale', '?')}")
    print(f"outcome:      {result['outcome']}")
    print(f"steps:        {result['steps']}")
    print(f"distance:     {result['distance_traveled']:.1f} m")
    print(f"stop-waits:   {result['stop_wait_events']}")
    print(f"final dist:   {result['final_distance']:.2f} m")
    stops = sum(1 for s in steps if s["decision"]["action"] == "stop_and_wait")
    print(f"stop decisions: {stops} of {len(steps)} steps")

    if not args.no_figure:
        out = Path(args.figure) if args.figure else Path(args.trace).with_suffix(".png")
        render_episode_figure(records, out)
        print(f"figure:       {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wayfarer",
        description="Instruction-grounded outdoor navigation simulator.",
        epilog=f"built-in scenarios: {', '.join(list_builtin_scenarios()) or '(none)'}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenario trials and write traces + summary + figures")
    run.add_argument("scenarios", nargs="+", help="scenario file paths or built-in scenario names")
    run.add_argument("--trials", type=int, default=5, help="trials per scenario (default 5)")
    run.add_argument("--seed", type=int, default=0, help="base seed; trial k uses seed+k (default 0)")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override an EpisodeConfig field")
    run.add_argument("--adapter", default="reference", help="'reference' or 'replay:<path>' (default reference)")
    run.add_argument("--out", default="wayfarer_out", help="output directory (default ./wayfarer_out)")
    run.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check fixture/scenario documents")
    val.add_argument("paths", nargs="+", help="fixture or scenario files (or built-in scenario names)")
    val.set_defaults(func=cmd_validate)

    rep = sub.add_parser("replay", help="re-render the summary and figure for a trace")
    rep.add_argument("trace", help="trace .jsonl file")
    rep.add_argument("--figure", help="figure output path (default: trace path with .png)")
    rep.add_argument("--no-figure", action="store_true", help="skip figure rendering")
    rep.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
