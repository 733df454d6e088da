"""Pluggable judges of behavioral correctness.

Three sources: an interactive console prompt reproducing the human
evaluator protocol, a scripted map for hermetic tests, and a serial
pattern matcher for tasks whose behavior is observable on the console.
A source may also defer to the control API (verdicts arriving over HTTP),
in which case the waiting attempt is completed by the API writer itself.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Protocol

from .corpus import TaskSpec
from .errors import InconsistentInputs, MissingEntry
from .journal import AttemptView
from .outcomes import Verdict
from .toolchain import SerialTranscript, ToolchainProfile, capture_serial


@dataclass
class Resolution:
    """What a verdict source produced for one awaiting attempt.

    verdict is None only when the attempt was completed externally (API
    path); transcript, when present, is persisted with the attempt.
    """

    verdict: Verdict | None
    transcript: SerialTranscript | None = None


class VerdictSource(Protocol):
    def resolve(self, view: AttemptView, task: TaskSpec) -> Resolution: ...


class ScriptedVerdicts:
    """Look up verdicts by attempt id; the hermetic test workhorse."""

    def __init__(self, entries: dict[str, str] | None = None, default: str | None = None):
        self.entries = dict(entries or {})
        self.default = default

    def resolve(self, view: AttemptView, task: TaskSpec) -> Resolution:
        value = self.entries.get(view.id, self.default)
        if value is None:
            raise MissingEntry(f"no scripted verdict for attempt {view.id}")
        if value not in ("pass", "fail"):
            raise MissingEntry(f"scripted verdict for {view.id} must be 'pass' or 'fail', got {value!r}")
        return Resolution(
            verdict=Verdict(
                passed=value == "pass",
                notes="scripted",
                source="scripted",
                evaluator="scripted",
                timestamp=time.time(),
            )
        )


class SerialPatternVerdicts:
    """Pass iff the task's serial pattern matches the captured transcript."""

    def __init__(self, profiles: dict[str, ToolchainProfile], capture_s: float = 5.0):
        self.profiles = profiles
        self.capture_s = capture_s

    def resolve(self, view: AttemptView, task: TaskSpec) -> Resolution:
        if task.check.mode != "serial-pattern":
            raise InconsistentInputs(
                f"task {task.id!r} uses a {task.check.mode!r} check; the serial matcher needs serial-pattern"
            )
        profile = self.profiles[view.key.platform]
        transcript = capture_serial(profile, self.capture_s)  # PortUnavailable -> incomplete upstream
        passed = re.search(task.check.pattern, transcript.text) is not None
        notes = "pattern matched" if passed else f"pattern {task.check.pattern!r} not found in transcript"
        return Resolution(
            verdict=Verdict(
                passed=passed,
                notes=notes,
                source="serial-matcher",
                evaluator="serial-matcher",
                timestamp=time.time(),
            ),
            transcript=transcript,
        )


class ConsoleVerdicts:
    """Block on stdin for a human pass/fail judgment against the checklist."""

    def __init__(self, evaluator: str = "console", input_fn=input, print_fn=print):
        self.evaluator = evaluator
        self._input = input_fn
        self._print = print_fn

    def resolve(self, view: AttemptView, task: TaskSpec) -> Resolution:
        if task.check.mode == "human" and not task.check.checklist:
            raise InconsistentInputs(f"task {task.id!r} has an empty checklist")
        self._print(f"\n=== Verdict needed: {view.id} ===")
        self._print(f"Task: {task.title}")
        for item in task.check.checklist:
            self._print(f"  [ ] {item}")
        while True:
            answer = self._input("pass/fail> ").strip().lower()
            if answer in ("pass", "p", "fail", "f"):
                break
            self._print("please answer 'pass' or 'fail'")
        notes = self._input("notes> ").strip()
        return Resolution(
            verdict=Verdict(
                passed=answer.startswith("p"),
                notes=notes,
                source="interactive",
                evaluator=self.evaluator,
                timestamp=time.time(),
            )
        )


class ApiVerdicts:
    """Defer to verdicts submitted through the control API.

    The API writer classifies and journals the completion; this source
    just waits for the attempt to leave the awaiting state.
    """

    def __init__(self, runtime, poll_s: float = 0.1):
        self.runtime = runtime
        self.poll_s = poll_s

    def resolve(self, view: AttemptView, task: TaskSpec) -> Resolution:
        self.runtime.await_complete(view.key, view.attempt)
        return Resolution(verdict=None)
