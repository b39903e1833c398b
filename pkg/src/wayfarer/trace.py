"""Line-delimited episode traces: one JSON record per control step.

Records are serialized canonically (sorted keys, no whitespace) so a fixed
(scenario, seed) pair produces byte-identical files run after run. A trace is
self-contained for replay: the meta record snapshots the plan geometry,
crossing polygons, and light schedules alongside the per-step records.
"""

from __future__ import annotations

import json
from pathlib import Path


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class TraceWriter:
    """Appends canonical JSON lines to a trace file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8")

    def write(self, record: dict) -> None:
        self._fh.write(dumps(record))
        self._fh.write("\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_trace(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def split_trace(records: list[dict]) -> tuple[dict, list[dict], dict]:
    """Split raw records into (meta, steps, result)."""
    meta = next(r for r in records if r.get("type") == "meta")
    result = next(r for r in records if r.get("type") == "result")
    steps = [r for r in records if r.get("type") == "step"]
    return meta, steps, result
