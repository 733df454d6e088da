"""Append-only campaign journal: newline-delimited JSON state transitions.

Each record is self-describing and carries a monotone sequence number.
Replaying a journal folds the records into the exact campaign state at
write time, so a campaign can be killed at any byte offset and resumed: a
truncated final line is a crash artifact and is ignored; an undecodable
record earlier in the file is corruption and aborts.

Attempt lifecycle: generated -> built -> awaiting-verdict -> complete,
with incomplete marking an infrastructure failure at any stage (a later
re-execution may supersede it). The generated record stores the full run
record and bundle, which is what makes resume provider-call-free.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .assembler import ProjectBundle
from .errors import JournalCorruption
from .outcomes import Outcome, Verdict
from .pipeline import RunRecord
from .toolchain import BuildResult, FlashResult

STATES = ("generated", "built", "awaiting-verdict", "complete", "incomplete")
_STATE_RANK = {state: rank for rank, state in enumerate(STATES)}


@dataclass(frozen=True)
class InstanceKey:
    """One cell of the campaign grid: (task, skills mode, platform)."""

    task: str
    mode: str
    platform: str

    def slug(self) -> str:
        return f"{self.task}~{self.mode}~{self.platform}"

    def as_dict(self) -> dict:
        return {"task": self.task, "mode": self.mode, "platform": self.platform}


def attempt_id(key: InstanceKey, attempt: int) -> str:
    return f"{key.slug()}~a{attempt}"


def parse_attempt_id(raw: str) -> tuple[InstanceKey, int]:
    parts = raw.split("~")
    if len(parts) != 4 or not parts[3].startswith("a"):
        raise ValueError(f"malformed attempt id {raw!r}")
    return InstanceKey(task=parts[0], mode=parts[1], platform=parts[2]), int(parts[3][1:])


@dataclass
class AttemptView:
    """Folded journal state for one attempt slot."""

    key: InstanceKey
    attempt: int
    level: int = 0
    state: str = "generated"
    run: RunRecord | None = None
    bundle: ProjectBundle | None = None
    assembly_error: str | None = None
    build: BuildResult | None = None
    flash: FlashResult | None = None
    verdict: Verdict | None = None
    outcome: Outcome | None = None
    usage: dict | None = None
    transcript: dict | None = None
    task_info: dict | None = None
    incomplete_reason: str | None = None

    @property
    def id(self) -> str:
        return attempt_id(self.key, self.attempt)

    @property
    def complete(self) -> bool:
        return self.state == "complete"


def truncate_partial_tail(path: Path) -> None:
    """Drop a torn final record (crash artifact) so appends stay line-aligned."""
    path = Path(path)
    if not path.exists():
        return
    data = path.read_bytes()
    if not data or data.endswith(b"\n"):
        return
    keep = data.rfind(b"\n") + 1  # 0 when no newline survives at all
    with open(path, "r+b") as fh:
        fh.truncate(keep)


class JournalWriter:
    """Single writer appending JSON lines with monotone sequence numbers."""

    def __init__(self, path: Path, start_seq: int = 0):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        truncate_partial_tail(self.path)
        self._lock = threading.Lock()
        self._seq = start_seq
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict) -> int:
        with self._lock:
            self._seq += 1
            record = {"seq": self._seq, "ts": record.pop("ts", time.time()), **record}
            self._fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            self._fh.flush()
            return self._seq

    @property
    def seq(self) -> int:
        return self._seq

    def close(self) -> None:
        self._fh.close()


def read_records(path: Path) -> Iterator[dict]:
    """Yield journal records in order, tolerating a truncated final line.

    Decoding happens per line from raw bytes: a kill mid-append can cut a
    record anywhere, including inside a multi-byte UTF-8 sequence, and
    that torn tail must read as a crash artifact, not as corruption.
    """
    path = Path(path)
    if not path.exists():
        return
    lines = path.read_bytes().split(b"\n")
    for index, raw_line in enumerate(lines):
        if not raw_line.strip():
            continue
        trailing = all(not later.strip() for later in lines[index + 1 :])
        try:
            record = json.loads(raw_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            if trailing:
                return  # crash artifact: partially written last record
            raise JournalCorruption(f"{path}: undecodable record at line {index + 1}") from None
        if "seq" not in record or "type" not in record:
            raise JournalCorruption(f"{path}: record at line {index + 1} lacks seq/type")
        yield record


def attempt_record(
    key: InstanceKey,
    attempt: int,
    level: int,
    state: str,
    **payload,
) -> dict:
    if state not in STATES:
        raise ValueError(f"unknown attempt state {state!r}")
    return {
        "type": "attempt",
        **key.as_dict(),
        "attempt": attempt,
        "level": level,
        "state": state,
        **payload,
    }


@dataclass
class CampaignState:
    """Materialized view of a journal: every attempt slot seen so far."""

    attempts: dict[tuple[InstanceKey, int], AttemptView] = field(default_factory=dict)
    last_seq: int = 0
    meta: dict = field(default_factory=dict)

    def view(self, key: InstanceKey, attempt: int) -> AttemptView | None:
        return self.attempts.get((key, attempt))

    def by_id(self, raw_id: str) -> AttemptView | None:
        key, attempt = parse_attempt_id(raw_id)
        return self.view(key, attempt)

    def in_state(self, state: str) -> list[AttemptView]:
        return sorted(
            (v for v in self.attempts.values() if v.state == state),
            key=lambda v: (v.key.task, v.key.mode, v.key.platform, v.attempt),
        )

    def state_counts(self) -> dict[str, int]:
        counts = {state: 0 for state in STATES}
        for view in self.attempts.values():
            counts[view.state] += 1
        return counts

    def apply(self, record: dict) -> None:
        self.last_seq = max(self.last_seq, record["seq"])
        kind = record["type"]
        if kind == "campaign":
            self.meta = {k: v for k, v in record.items() if k not in ("seq", "ts", "type")}
            return
        if kind != "attempt":
            return
        key = InstanceKey(task=record["task"], mode=record["mode"], platform=record["platform"])
        slot = (key, record["attempt"])
        view = self.attempts.get(slot)
        if view is None:
            view = AttemptView(key=key, attempt=record["attempt"], level=record.get("level", 0))
            self.attempts[slot] = view
        state = record["state"]
        view.level = record.get("level", view.level)
        if state == "generated":
            view.run = RunRecord.from_dict(record["run"])
            view.bundle = ProjectBundle.from_dict(record["bundle"]) if record.get("bundle") else None
            view.assembly_error = record.get("assembly_error")
            # A regenerated attempt (after incomplete) starts a fresh lifecycle.
            view.build = None
            view.flash = None
            view.verdict = None
            view.outcome = None
            view.incomplete_reason = None
        elif state == "built":
            view.build = BuildResult.from_dict(record["build"])
            view.flash = FlashResult.from_dict(record["flash"]) if record.get("flash") else None
        elif state == "awaiting-verdict":
            view.task_info = record.get("task_info")
        elif state == "complete":
            view.outcome = Outcome.parse(record["outcome"])
            view.verdict = Verdict.from_dict(record.get("verdict"))
            view.usage = record.get("usage")
            view.transcript = record.get("transcript")
            if record.get("build"):
                view.build = BuildResult.from_dict(record["build"])
            if record.get("flash"):
                view.flash = FlashResult.from_dict(record["flash"])
        elif state == "incomplete":
            view.incomplete_reason = record.get("reason", "")
        view.state = state


def replay(path: Path) -> CampaignState:
    """Reconstruct campaign state from a journal file."""
    state = CampaignState()
    for record in read_records(path):
        state.apply(record)
    return state
