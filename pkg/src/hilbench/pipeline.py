"""Three-node agent pipeline: manager -> coder -> assembler.

The manager selects skills from the header index; the coder generates the
firmware source; the assembler (a pure function, no model call) packages
it into a ready-to-compile project. With skills disabled the manager is
skipped entirely and the task prompt goes straight to the coder, so a run
costs exactly one provider call instead of two.
"""

from __future__ import annotations

import logging
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import assembler
from .corpus import TaskSpec, render_task_prompt
from .errors import AssemblyError
from .platforms import PlatformProfile
from .providers import GenerationParams, Provider, ProviderRequest, TokenUsage
from .skills import Skill, SkillLibrary, load_library, normalize_name, render_header_index

log = logging.getLogger(__name__)

SKILLS_MODES = ("none", "llm-generated", "human-expert")

MANAGER_SYSTEM_PROMPT = (
    "You are a project planner for embedded firmware development. "
    "Review the available skill headers and the task requirements, then select "
    "the skills the coder should follow. Output only the selected skill names, "
    "one per line. If no skill applies, output nothing."
)

CODER_SYSTEM_PROMPT = (
    "You are an expert embedded engineer. Write complete, working firmware for "
    "the given task and platform. Respond with a single code block containing "
    "the full contents of the main source file. Output code only."
)

CODER_STANDARDS_HEADING = "Apply the following standards:"


@dataclass(frozen=True)
class SkillsMode:
    """One of the three agent configurations; non-none modes carry a library."""

    kind: str
    library_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.kind not in SKILLS_MODES:
            raise ValueError(f"skills mode must be one of {SKILLS_MODES}, got {self.kind!r}")
        if self.kind != "none" and self.library_dir is None:
            raise ValueError(f"skills mode {self.kind!r} requires a library directory")

    @property
    def uses_skills(self) -> bool:
        return self.kind != "none"


@dataclass(frozen=True)
class NodeTrace:
    """Prompt, raw response and usage for one pipeline node."""

    system: str
    messages: tuple[str, ...]
    response: str
    usage: TokenUsage
    selected: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        data = {
            "system": self.system,
            "messages": list(self.messages),
            "response": self.response,
            "usage": self.usage.as_dict(),
        }
        if self.selected:
            data["selected"] = list(self.selected)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "NodeTrace":
        return cls(
            system=data["system"],
            messages=tuple(data["messages"]),
            response=data["response"],
            usage=TokenUsage.from_dict(data["usage"]),
            selected=tuple(data.get("selected", ())),
        )


@dataclass(frozen=True)
class RunRecord:
    run_id: str
    task_id: str
    platform_id: str
    mode: str
    coder: NodeTrace
    manager: NodeTrace | None = None
    provider: str = ""
    params: GenerationParams = GenerationParams()
    started_at: float = 0.0
    finished_at: float = 0.0

    @property
    def total_usage(self) -> TokenUsage:
        total = self.coder.usage
        if self.manager is not None:
            total = total + self.manager.usage
        return total

    def as_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "task": self.task_id,
            "platform": self.platform_id,
            "mode": self.mode,
            "manager": self.manager.as_dict() if self.manager else None,
            "coder": self.coder.as_dict(),
            "provider": self.provider,
            "params": self.params.as_dict(),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(
            run_id=data["run_id"],
            task_id=data["task"],
            platform_id=data["platform"],
            mode=data["mode"],
            manager=NodeTrace.from_dict(data["manager"]) if data.get("manager") else None,
            coder=NodeTrace.from_dict(data["coder"]),
            provider=data.get("provider", ""),
            params=GenerationParams(**data.get("params", {})),
            started_at=data.get("started_at", 0.0),
            finished_at=data.get("finished_at", 0.0),
        )


def _selection_candidates(line: str) -> list[str]:
    """Candidate strings to match a manager output line against skill names.

    The expected grammar is one bare name per line, but models wrap names
    in bullets or prose ("I would use: Zephyr GPIO"); we also try the text
    after a leading bullet and after the last colon. No edit-distance
    matching.
    """
    stripped = line.strip()
    candidates = [stripped]
    bullet = stripped.lstrip("-*+ \t")
    if bullet != stripped:
        candidates.append(bullet)
    if ":" in stripped:
        candidates.append(stripped.rsplit(":", 1)[1])
    return [c for c in candidates if c]


def parse_selection(response: str, library: SkillLibrary) -> tuple[list[str], list[str]]:
    """Map manager output lines to skill names; unmatched lines are dropped.

    Returns (selected names in order of first mention, unmatched lines).
    """
    by_norm = {normalize_name(s.name): s.name for s in library.skills}
    selected: list[str] = []
    unmatched: list[str] = []
    for line in response.splitlines():
        if not line.strip():
            continue
        match = None
        for candidate in _selection_candidates(line):
            match = by_norm.get(normalize_name(candidate))
            if match:
                break
        if match is None:
            unmatched.append(line.strip())
        elif match not in selected:
            selected.append(match)
    return selected, unmatched


def run_manager(
    task: TaskSpec,
    profile: PlatformProfile,
    header_index: str,
    library: SkillLibrary,
    provider: Provider,
    model: str = "default",
    params: GenerationParams = GenerationParams(),
) -> NodeTrace:
    """Ask the planner node to pick skills for a task."""
    if not header_index.strip():
        raise ValueError("manager requires a non-empty header index")
    messages = (
        "Available skills:\n" + header_index,
        render_task_prompt(task, profile),
    )
    request = ProviderRequest(system=MANAGER_SYSTEM_PROMPT, messages=messages, model=model, params=params)
    response = provider.complete(request)
    selected, unmatched = parse_selection(response.text, library)
    for line in unmatched:
        log.debug("manager line matched no skill, dropped: %r", line)
    return NodeTrace(
        system=request.system,
        messages=messages,
        response=response.text,
        usage=response.usage,
        selected=tuple(selected),
    )


def coder_system_prompt(selected_skills: list[Skill]) -> str:
    if not selected_skills:
        return CODER_SYSTEM_PROMPT
    sections = [CODER_SYSTEM_PROMPT, "", CODER_STANDARDS_HEADING]
    for skill in selected_skills:
        sections.append(f"### {skill.name}")
        sections.append(skill.body.strip())
    return "\n\n".join(sections)


def run_coder(
    task: TaskSpec,
    profile: PlatformProfile,
    selected_skills: list[Skill],
    provider: Provider,
    model: str = "default",
    params: GenerationParams = GenerationParams(),
) -> NodeTrace:
    """Ask the engineer node for the main firmware source."""
    messages = (render_task_prompt(task, profile),)
    request = ProviderRequest(
        system=coder_system_prompt(selected_skills), messages=messages, model=model, params=params
    )
    response = provider.complete(request)
    return NodeTrace(
        system=request.system, messages=messages, response=response.text, usage=response.usage
    )


def run_pipeline(
    task: TaskSpec,
    profile: PlatformProfile,
    mode: SkillsMode,
    provider: Provider,
    library: SkillLibrary | None = None,
    model: str = "default",
    params: GenerationParams = GenerationParams(),
    run_id: str | None = None,
    clock: Callable[[], float] = time.time,
) -> tuple[RunRecord, assembler.ProjectBundle]:
    """Execute manager (unless skills are off), coder, then the assembler.

    The assembler stage is deterministic and consumes zero provider
    tokens; with a replay provider and fixed run_id/clock the whole run is
    bit-reproducible, bundle included.
    """
    started = clock()
    manager_trace: NodeTrace | None = None
    selected: list[Skill] = []
    if mode.uses_skills:
        if library is None:
            library = load_library(mode.library_dir)
        index = render_header_index(library.headers)
        manager_trace = run_manager(task, profile, index, library, provider, model=model, params=params)
        selected = [library.get(name) for name in manager_trace.selected]
    coder_trace = run_coder(task, profile, selected, provider, model=model, params=params)

    record = RunRecord(
        run_id=run_id or uuid.uuid4().hex,
        task_id=task.id,
        platform_id=profile.id,
        mode=mode.kind,
        manager=manager_trace,
        coder=coder_trace,
        provider=getattr(provider, "name", type(provider).__name__),
        params=params,
        started_at=started,
        finished_at=clock(),
    )
    try:
        source = assembler.extract_code(coder_trace.response)
        bundle = assembler.assemble(profile, source, task)
    except AssemblyError as exc:
        # Let callers keep the paid-for provider traces: a campaign journals
        # the run and classifies the attempt CF instead of losing the work.
        exc.run_record = record
        raise
    return record, bundle
