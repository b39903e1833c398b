"""Recorded-response replay adapters.

A replay log is a JSONL file of {"kind": ..., "response": ...} records, one
per adapter call, consumed in order per kind. It lets regression tests drive
any model seat from captured outputs (e.g. real VLM responses) without the
model being present. Running out of records is an adapter error and surfaces
through the usual failure mapping.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path
from typing import Sequence

from .grounding import Instruction, IntentSelection
from .map_service import PoiCandidate
from .policy import JointDecision, Observation, Trajectory

KINDS = ("categories", "select", "decide", "predict")


class ReplayLog:
    """Parsed replay file with one FIFO queue per adapter kind."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.queues: dict[str, deque] = {kind: deque() for kind in KINDS}
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                kind = record.get("kind")
                if kind not in KINDS:
                    raise ValueError(f"{self.path}:{lineno}: unknown replay kind {kind!r}")
                if "response" not in record:
                    raise ValueError(f"{self.path}:{lineno}: replay record has no response")
                self.queues[kind].append(record["response"])

    def next(self, kind: str):
        if not self.queues[kind]:
            raise RuntimeError(f"replay log {self.path} has no more {kind!r} responses")
        return self.queues[kind].popleft()


class ReplayIntentModel:
    def __init__(self, log: ReplayLog):
        self.log = log

    def propose_categories(self, instruction: Instruction) -> list[str]:
        return list(self.log.next("categories"))

    def select_destination(self, instruction: Instruction, candidates: Sequence[PoiCandidate]) -> IntentSelection:
        raw = self.log.next("select")
        return IntentSelection(
            candidate_id=raw["candidate_id"],
            rationale=raw["rationale"],
            confidence=raw.get("confidence"),
        )


class ReplayJointModel:
    def __init__(self, log: ReplayLog):
        self.log = log

    def decide(self, obs: Observation) -> JointDecision:
        raw = self.log.next("decide")
        return JointDecision(
            routing=raw["routing"],
            action=raw["action"],
            conf=raw["conf"],
            reason=raw["reason"],
        )


class ReplayLocalPolicy:
    def __init__(self, log: ReplayLog):
        self.log = log

    def predict(self, obs: Observation) -> Trajectory:
        raw = self.log.next("predict")
        return Trajectory(points=tuple((float(x), float(y)) for x, y in raw["points"]))
