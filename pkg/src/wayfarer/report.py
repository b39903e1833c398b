"""Batch summaries (stdout table + CSV) and trace figures.

The summary mirrors the experiment-table layout: one row per scenario, one
per task category, and an average row. The CSV is the machine-readable twin
of the printed table. Figures are rendered from traces alone (traces embed
the plan and world geometry), so `replay` can redraw an episode long after
the run.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .orchestrator import EpisodeResult, TrialBatch, success_rate


@dataclass(frozen=True)
class ScenarioOutcome:
    scenario: str
    task: str
    results: tuple[EpisodeResult, ...]


def _row(row_type: str, task: str, scenario: str, results: tuple[EpisodeResult, ...]) -> dict:
    batch = TrialBatch(results=results)
    return {
        "row_type": row_type,
        "task": task,
        "scenario": scenario,
        "successes": sum(1 for r in results if r.outcome == "success"),
        "trials": len(results),
        "sr": success_rate(batch),
        "stop_wait_events": sum(r.stop_wait_events for r in results),
        "aborted_safety": sum(1 for r in results if r.outcome == "aborted_safety"),
        "aborted_iterations": sum(1 for r in results if r.outcome == "aborted_iterations"),
        "adapter_failure": sum(1 for r in results if r.outcome == "adapter_failure"),
    }


def summary_rows(outcomes: list[ScenarioOutcome]) -> list[dict]:
    """Scenario rows, then category rows (first-appearance order), then average."""
    rows = [_row("scenario", o.task, o.scenario, o.results) for o in outcomes]
    tasks: list[str] = []
    for o in outcomes:
        if o.task not in tasks:
            tasks.append(o.task)
    for task in tasks:
        grouped = tuple(r for o in outcomes if o.task == task for r in o.results)
        rows.append(_row("category", task, "(all)", grouped))
    everything = tuple(r for o in outcomes for r in o.results)
    rows.append(_row("average", "average", "(all)", everything))
    return rows


def format_table(rows: list[dict]) -> str:
    headers = ("task", "scenario", "success/trials", "SR", "stops", "aborts")
    body = []
    for row in rows:
        aborts = row["aborted_safety"] + row["aborted_iterations"] + row["adapter_failure"]
        body.append(
            (
                row["task"],
                row["scenario"],
                f"{row['successes']} / {row['trials']}",
                f"{100.0 * row['sr']:.0f}%",
                str(row["stop_wait_events"]),
                str(aborts),
            )
        )
    widths = [max(len(headers[i]), *(len(r[i]) for r in body)) for i in range(len(headers))]
    separator = "  ".join("-" * w for w in widths)
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)), separator]
    previous_type = rows[0]["row_type"] if rows else None
    for row, raw in zip(body, rows):
        if raw["row_type"] != previous_type:
            lines.append(separator)
            previous_type = raw["row_type"]
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines)


def write_summary_csv(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames = [
        "row_type", "task", "scenario", "successes", "trials", "sr",
        "stop_wait_events", "aborted_safety", "aborted_iterations", "adapter_failure",
    ]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def render_episode_figure(records: list[dict], out_path: str | Path, title: str | None = None) -> Path:
    """Top-down plot of one episode: plan, executed path, zones, stops."""
    meta = next(r for r in records if r.get("type") == "meta")
    steps = [r for r in records if r.get("type") == "step"]
    result = next((r for r in records if r.get("type") == "result"), {})

    fig, ax = plt.subplots(figsize=(7.5, 7.5))

    for zone in meta.get("crossings", []):
        poly = zone["polygon"] + [zone["polygon"][0]]
        xs = [v[0] for v in poly]
        ys = [v[1] for v in poly]
        ax.fill(xs, ys, color="#f2a654", alpha=0.35, lw=1.0, edgecolor="#b36b00", zorder=1)

    plan = meta.get("plan", [])
    if plan:
        ax.plot([p[0] for p in plan], [p[1] for p in plan], "--", color="0.55", lw=1.0, zorder=2, label="waypoint plan")
        ax.plot([p[0] for p in plan], [p[1] for p in plan], ".", color="0.55", ms=2.5, zorder=2)
        ax.plot(plan[0][0], plan[0][1], "o", color="#2a9d2a", ms=8, zorder=4, label="start")
        ax.plot(plan[-1][0], plan[-1][1], "*", color="#7d3cbd", ms=14, zorder=4, label="destination")

    if steps:
        xs = [s["post_true"][0] for s in steps]
        ys = [s["post_true"][1] for s in steps]
        ax.plot(xs, ys, "-", color="#1f77b4", lw=1.6, zorder=3, label="executed path")
        stop_x = [s["post_true"][0] for s in steps if s["command"]["kind"] == "stop"]
        stop_y = [s["post_true"][1] for s in steps if s["command"]["kind"] == "stop"]
        if stop_x:
            ax.plot(stop_x, stop_y, "x", color="#d62728", ms=7, mew=2, zorder=5, label="stop-and-wait")

    for light in meta.get("lights", []):
        ax.plot(light["x"], light["y"], "^", color="#333333", ms=9, zorder=5)
        ax.annotate(light["id"], (light["x"], light["y"]), textcoords="offset points", xytext=(5, 5), fontsize=8)

    outcome = result.get("outcome", "?")
    ax.set_title(title or f"{meta.get('instruction', '')!r} -> {meta.get('destination', {}).get('name', '?')} [{outcome}]")
    ax.set_xlabel("x east (m)")
    ax.set_ylabel("y north (m)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True, lw=0.3, alpha=0.6)
    ax.legend(loc="best", fontsize=8)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def render_summary_figure(rows: list[dict], out_path: str | Path) -> Path:
    """Horizontal SR bars, one per scenario row plus the average."""
    shown = [r for r in rows if r["row_type"] in ("scenario", "average")]
    labels = [r["scenario"] if r["row_type"] == "scenario" else "average" for r in shown]
    values = [r["sr"] for r in shown]
    colors = ["#1f77b4" if r["row_type"] == "scenario" else "#ff7f0e" for r in shown]

    fig, ax = plt.subplots(figsize=(7.0, 0.5 * len(shown) + 1.5))
    y = range(len(shown))
    ax.barh(y, values, color=colors)
    ax.set_yticks(list(y))
    ax.set_yticklabels(labels, fontsize=9)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.05)
    ax.set_xlabel("success rate")
    for i, v in enumerate(values):
        ax.text(min(v + 0.02, 1.0), i, f"{100 * v:.0f}%", va="center", fontsize=8)
    ax.grid(True, axis="x", lw=0.3, alpha=0.6)
    fig.tight_layout()

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
