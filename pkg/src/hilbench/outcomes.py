"""Per-attempt outcome taxonomy and its classification rule.

Exactly one of three outcomes per attempt, totally ordered CF < BF < BC:
CF (fails to compile or cannot be flashed), BF (flashes but fails the
behavioral test, including hangs and watchdog resets), BC (correct
observable behavior). Infrastructure failures are none of these; those
attempts are incomplete and excluded from metrics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InconsistentInputs
from .toolchain import BuildResult, FlashResult


class Outcome(enum.IntEnum):
    CF = 0
    BF = 1
    BC = 2

    @classmethod
    def parse(cls, name: str) -> "Outcome":
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"unknown outcome {name!r}") from None


@dataclass(frozen=True)
class Verdict:
    passed: bool
    notes: str = ""
    source: str = ""
    evaluator: str = ""
    timestamp: float = 0.0

    def as_dict(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "notes": self.notes,
            "source": self.source,
            "evaluator": self.evaluator,
            "ts": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict | None) -> "Verdict | None":
        if data is None:
            return None
        return cls(
            passed=data["verdict"] == "pass",
            notes=data.get("notes", ""),
            source=data.get("source", ""),
            evaluator=data.get("evaluator", ""),
            timestamp=data.get("ts", 0.0),
        )


def classify_outcome(build: BuildResult, flash: FlashResult | None, verdict: Verdict | None) -> Outcome:
    """Classify one attempt from its build, flash and verdict.

    A verdict must be present exactly when compile and flash both
    succeeded; anything else is an InconsistentInputs error, not a
    classification.
    """
    hardware_ok = build.ok and flash is not None and flash.ok
    if not hardware_ok:
        if verdict is not None:
            raise InconsistentInputs("verdict supplied for an attempt that never ran on hardware")
        return Outcome.CF
    if verdict is None:
        raise InconsistentInputs("attempt flashed successfully but carries no verdict")
    return Outcome.BC if verdict.passed else Outcome.BF
