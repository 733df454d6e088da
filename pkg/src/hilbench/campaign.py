"""Resumable evaluation campaigns over the (task x mode x platform x attempt) grid.

Each attempt runs two phases: generation (provider calls, journaled with
the full run record and bundle) and hardware-in-the-loop execution
(compile, flash, verdict). Every stage transition is journaled before the
next begins, so a killed campaign resumes exactly where it stopped:
completed attempts are never re-executed and journaled generations are
never re-sent to the provider.

Infrastructure failures (provider, workspace, serial port) mark the
attempt incomplete and move on; incomplete attempts are retried on resume
and excluded from metrics.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, TaskSpec, load_corpus
from .errors import (
    AssemblyError,
    InconsistentInputs,
    MissingEntry,
    PlanError,
    PortUnavailable,
    ProviderError,
    WorkspaceError,
)
from .journal import (
    AttemptView,
    CampaignState,
    InstanceKey,
    JournalWriter,
    attempt_record,
    replay,
)
from .outcomes import Outcome, Verdict, classify_outcome
from .pipeline import RunRecord, SkillsMode, run_pipeline
from .platforms import PLATFORMS, get_platform
from .providers import GenerationParams, Provider
from .skills import SkillLibrary, load_library
from .toolchain import BuildResult, ToolchainProfile, compile_bundle, flash
from .verdicts import Resolution, VerdictSource

log = logging.getLogger(__name__)


@dataclass
class CampaignPlan:
    corpus_dir: Path
    journal_path: Path
    platforms: tuple[str, ...]
    modes: tuple[str, ...]
    attempts: int = 5
    skills_dirs: dict[str, Path] = field(default_factory=dict)
    provider_config: Path | None = None
    toolchains_path: Path | None = None
    tasks: tuple[str, ...] = ()
    model: str = "default"
    params: GenerationParams = field(default_factory=GenerationParams)
    serial_capture_s: float = 5.0

    def validate(self) -> None:
        if self.attempts < 1:
            raise PlanError("attempts must be >= 1")
        if not self.platforms or not self.modes:
            raise PlanError("plan needs at least one platform and one skills mode")
        for platform in self.platforms:
            if platform not in PLATFORMS:
                raise PlanError(f"unknown platform {platform!r}")
        for mode in self.modes:
            if mode not in ("none", "llm-generated", "human-expert"):
                raise PlanError(f"unknown skills mode {mode!r}")
            if mode != "none" and mode not in self.skills_dirs:
                raise PlanError(f"mode {mode!r} requires a skills directory")
        if not Path(self.corpus_dir).exists():
            raise PlanError(f"corpus directory {self.corpus_dir} does not exist")
        for mode, directory in self.skills_dirs.items():
            if not Path(directory).exists():
                raise PlanError(f"skills directory for {mode!r} does not exist: {directory}")


def load_plan(path: Path) -> CampaignPlan:
    """Read a plan file; relative paths resolve against the plan's directory."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PlanError(f"cannot read plan {path}: {exc}") from exc
    base = path.parent

    def resolve(p: str) -> Path:
        return (base / p).resolve()

    plan = CampaignPlan(
        corpus_dir=resolve(data["corpus"]),
        journal_path=resolve(data["journal"]),
        platforms=tuple(data["platforms"]),
        modes=tuple(data["modes"]),
        attempts=int(data.get("attempts", 5)),
        skills_dirs={mode: resolve(p) for mode, p in data.get("skills", {}).items()},
        provider_config=resolve(data["provider"]) if "provider" in data else None,
        toolchains_path=resolve(data["toolchains"]) if "toolchains" in data else None,
        tasks=tuple(data.get("tasks", ())),
        model=data.get("model", "default"),
        params=GenerationParams(
            temperature=float(data.get("temperature", 0.2)),
            max_tokens=int(data.get("max_tokens", 8192)),
        ),
        serial_capture_s=float(data.get("serial_capture_s", 5.0)),
    )
    plan.validate()
    return plan


@dataclass(frozen=True)
class InstanceSlot:
    key: InstanceKey
    level: int


def enumerate_instances(plan: CampaignPlan, corpus: Corpus) -> list[InstanceSlot]:
    """The full instance grid, in deterministic task -> mode -> platform order."""
    task_ids = list(plan.tasks) if plan.tasks else corpus.task_ids
    levels = corpus.levels()
    for task_id in task_ids:
        if task_id not in levels:
            raise PlanError(f"plan references unknown task {task_id!r}")
        for platform in plan.platforms:
            if not corpus.has_variant(task_id, platform):
                raise PlanError(f"task {task_id!r} has no variant for platform {platform!r}")
    ordered = sorted(task_ids, key=lambda t: (levels[t], t))
    return [
        InstanceSlot(key=InstanceKey(task=task_id, mode=mode, platform=platform), level=levels[task_id])
        for task_id in ordered
        for mode in plan.modes
        for platform in plan.platforms
    ]


class CampaignRuntime:
    """Shared journal writer + folded state, safe for the API thread.

    All appends flow through here so the in-memory state and the file
    never diverge, and waiters (API verdict path) wake on every change.
    """

    def __init__(self, journal_path: Path):
        self.journal_path = Path(journal_path)
        self.state: CampaignState = replay(self.journal_path)
        self.writer = JournalWriter(self.journal_path, start_seq=self.state.last_seq)
        self.cond = threading.Condition()

    def append(self, record: dict) -> None:
        with self.cond:
            seq = self.writer.append(dict(record))
            self.state.apply({**record, "seq": seq})
            self.cond.notify_all()

    def view(self, key: InstanceKey, attempt: int) -> AttemptView | None:
        with self.cond:
            return self.state.view(key, attempt)

    def submit_verdict(self, raw_id: str, passed: bool, notes: str, evaluator: str = "api") -> AttemptView:
        """Classify and journal a verdict arriving from outside the loop.

        Rejects attempts that are not awaiting judgment (CF attempts never
        hold verdicts; completed attempts cannot be re-judged).
        """
        with self.cond:
            view = self.state.by_id(raw_id)
        if view is None:
            raise KeyError(f"unknown attempt {raw_id!r}")
        if view.state != "awaiting-verdict":
            raise InconsistentInputs(f"attempt {raw_id} is {view.state}, not awaiting-verdict")
        verdict = Verdict(passed=passed, notes=notes, source="api", evaluator=evaluator, timestamp=time.time())
        outcome = classify_outcome(view.build, view.flash, verdict)
        self.append(
            attempt_record(
                view.key,
                view.attempt,
                view.level,
                "complete",
                outcome=outcome.name,
                verdict=verdict.as_dict(),
                usage=_usage_payload(view.run),
            )
        )
        return self.state.view(view.key, view.attempt)

    def await_complete(self, key: InstanceKey, attempt: int, timeout_s: float | None = None) -> AttemptView:
        deadline = None if timeout_s is None else time.monotonic() + timeout_s
        with self.cond:
            while True:
                view = self.state.view(key, attempt)
                if view is not None and view.state == "complete":
                    return view
                remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
                if deadline is not None and remaining == 0.0:
                    raise TimeoutError(f"attempt {attempt_id_str(key, attempt)} not completed in time")
                self.cond.wait(timeout=remaining if remaining is not None else 1.0)

    def close(self) -> None:
        self.writer.close()


def attempt_id_str(key: InstanceKey, attempt: int) -> str:
    return f"{key.slug()}~a{attempt}"


def _usage_payload(run: RunRecord | None) -> dict | None:
    if run is None:
        return None
    return {
        "manager": run.manager.usage.as_dict() if run.manager else None,
        "coder": run.coder.usage.as_dict(),
    }


@dataclass
class CampaignSummary:
    instances: int
    attempt_slots: int
    executed: int
    resumed: int
    state_counts: dict[str, int]

    def as_dict(self) -> dict:
        return {
            "instances": self.instances,
            "attempt_slots": self.attempt_slots,
            "executed": self.executed,
            "resumed": self.resumed,
            "states": self.state_counts,
        }


class CampaignRunner:
    """Drives one plan to completion against a provider and toolchains."""

    def __init__(
        self,
        plan: CampaignPlan,
        provider: Provider,
        toolchains: dict[str, ToolchainProfile],
        verdict_source: VerdictSource,
        runtime: CampaignRuntime | None = None,
        workspace_root: Path | None = None,
    ):
        plan.validate()
        self.plan = plan
        self.provider = provider
        self.toolchains = toolchains
        self.verdict_source = verdict_source
        self.runtime = runtime or CampaignRuntime(plan.journal_path)
        self.workspace_root = Path(workspace_root) if workspace_root else Path(str(plan.journal_path) + ".work")
        self.corpus = load_corpus(plan.corpus_dir)
        self._libraries: dict[str, SkillLibrary] = {
            mode: load_library(path) for mode, path in plan.skills_dirs.items() if mode in plan.modes
        }
        for platform in plan.platforms:
            if platform not in toolchains:
                raise PlanError(f"no toolchain profile for platform {platform!r}")

    def run(self) -> CampaignSummary:
        instances = enumerate_instances(self.plan, self.corpus)
        if not self.runtime.state.meta:
            self.runtime.append(
                {
                    "type": "campaign",
                    "platforms": list(self.plan.platforms),
                    "modes": list(self.plan.modes),
                    "attempts": self.plan.attempts,
                    "instances": len(instances),
                    # Full grid up front, so status/instances can show
                    # never-executed slots as pending.
                    "grid": [{**slot.key.as_dict(), "level": slot.level} for slot in instances],
                }
            )
        executed = resumed = 0
        for slot in instances:
            for attempt in range(1, self.plan.attempts + 1):
                view = self.runtime.view(slot.key, attempt)
                if view is not None and view.complete:
                    resumed += 1
                    continue
                executed += 1
                try:
                    self._run_attempt(slot, attempt)
                except (ProviderError, WorkspaceError, PortUnavailable, MissingEntry) as exc:
                    log.warning("attempt %s incomplete: %s", attempt_id_str(slot.key, attempt), exc)
                    self.runtime.append(
                        attempt_record(slot.key, attempt, slot.level, "incomplete", reason=str(exc))
                    )
        counts = self.runtime.state.state_counts()
        return CampaignSummary(
            instances=len(instances),
            attempt_slots=len(instances) * self.plan.attempts,
            executed=executed,
            resumed=resumed,
            state_counts=counts,
        )

    # -- stages --------------------------------------------------------------

    def _run_attempt(self, slot: InstanceSlot, attempt: int) -> None:
        key = slot.key
        task = self.corpus.variant(key.task, key.platform)
        profile = get_platform(key.platform)
        view = self.runtime.view(key, attempt)

        if view is None or view.run is None:
            run, bundle, assembly_error = self._generate(task, profile, key, attempt)
            self.runtime.append(
                attempt_record(
                    key,
                    attempt,
                    slot.level,
                    "generated",
                    run=run.as_dict(),
                    bundle=bundle.as_dict() if bundle else None,
                    assembly_error=assembly_error,
                )
            )
            view = self.runtime.view(key, attempt)

        if view.build is None:
            if view.bundle is None:
                # Nothing assemblable came back from the coder; that is a CF,
                # not an infrastructure failure.
                build = BuildResult(
                    status="compile-failure",
                    log=f"assembly failed: {view.assembly_error}",
                    duration_s=0.0,
                    exit_code=None,
                )
                flash_result = None
            else:
                workspace = self.workspace_root / key.slug() / f"a{attempt}"
                build = compile_bundle(view.bundle, self.toolchains[key.platform], workspace)
                flash_result = flash(workspace, self.toolchains[key.platform]) if build.ok else None
            self.runtime.append(
                attempt_record(
                    key,
                    attempt,
                    slot.level,
                    "built",
                    build=build.as_dict(),
                    flash=flash_result.as_dict() if flash_result else None,
                )
            )
            view = self.runtime.view(key, attempt)

        hardware_ok = view.build.ok and view.flash is not None and view.flash.ok
        if not hardware_ok:
            self.runtime.append(
                attempt_record(
                    key,
                    attempt,
                    slot.level,
                    "complete",
                    outcome=Outcome.CF.name,
                    verdict=None,
                    usage=_usage_payload(view.run),
                )
            )
            return

        if view.state != "awaiting-verdict":
            self.runtime.append(
                attempt_record(
                    key,
                    attempt,
                    slot.level,
                    "awaiting-verdict",
                    task_info={
                        "title": task.title,
                        "description": task.description,
                        "check": {
                            "mode": task.check.mode,
                            "pattern": task.check.pattern,
                            "checklist": list(task.check.checklist),
                        },
                    },
                )
            )
            view = self.runtime.view(key, attempt)

        resolution: Resolution = self.verdict_source.resolve(view, task)
        if resolution.verdict is None:
            return  # completed externally through the API writer
        outcome = classify_outcome(view.build, view.flash, resolution.verdict)
        self.runtime.append(
            attempt_record(
                key,
                attempt,
                slot.level,
                "complete",
                outcome=outcome.name,
                verdict=resolution.verdict.as_dict(),
                usage=_usage_payload(view.run),
                transcript=resolution.transcript.as_dict() if resolution.transcript else None,
            )
        )

    def _generate(self, task: TaskSpec, profile, key: InstanceKey, attempt: int):
        mode = SkillsMode(kind=key.mode, library_dir=self.plan.skills_dirs.get(key.mode))
        try:
            run, bundle = run_pipeline(
                task,
                profile,
                mode,
                self.provider,
                library=self._libraries.get(key.mode),
                model=self.plan.model,
                params=self.plan.params,
                run_id=f"{attempt_id_str(key, attempt)}",
            )
            return run, bundle, None
        except AssemblyError as exc:
            run = getattr(exc, "run_record", None)
            if run is None:
                raise
            return run, None, str(exc)


def run_campaign(
    plan: CampaignPlan,
    provider: Provider,
    toolchains: dict[str, ToolchainProfile],
    verdict_source: VerdictSource,
    runtime: CampaignRuntime | None = None,
    workspace_root: Path | None = None,
) -> CampaignSummary:
    runner = CampaignRunner(plan, provider, toolchains, verdict_source, runtime, workspace_root)
    return runner.run()
