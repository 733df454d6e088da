"""Benchmark task corpus: schema, loader, validation, prompt rendering.

A task file ("*.task.md") reuses the restricted frontmatter grammar from
the skill format. Keys: id, level, title, target, pins (list of
"peripheral/signal=descriptor" entries) and the behavior check fields
(check-mode plus check-pattern or check-list). The body is the natural
language task description.

A logical task may ship one file per target platform (same id, different
target and pins); the per-level corpus shape counts distinct ids.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PinConventionMismatch, PlatformMismatch, SchemaError, UnknownPeripheral
from .peripherals import PERIPHERALS
from .platforms import PLATFORMS, PinConvention, PlatformProfile, descriptor_matches
from .skills import DELIMITER, parse_header_block

FULL_BENCHMARK_SHAPE = {1: 12, 2: 16, 3: 14}

_PIN_RE = re.compile(r"^(?P<peripheral>[^/=]+)/(?P<signal>[^/=]+)=(?P<descriptor>.+)$")


@dataclass(frozen=True)
class PinAssignment:
    peripheral: str
    signal: str
    descriptor: str


@dataclass(frozen=True)
class BehaviorCheck:
    """How an attempt is judged: by a human checklist or a serial pattern."""

    mode: str  # "human" | "serial-pattern"
    pattern: str | None = None
    checklist: tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskSpec:
    id: str
    level: int
    title: str
    description: str
    target: str
    pins: tuple[PinAssignment, ...]
    check: BehaviorCheck


@dataclass
class Corpus:
    tasks: list[TaskSpec]
    source: Path | None = None

    def __post_init__(self) -> None:
        self._by_key = {(t.id, t.target): t for t in self.tasks}

    @property
    def task_ids(self) -> list[str]:
        return sorted({t.id for t in self.tasks})

    def levels(self) -> dict[str, int]:
        return {t.id: t.level for t in self.tasks}

    def variant(self, task_id: str, platform_id: str) -> TaskSpec:
        task = self._by_key.get((task_id, platform_id))
        if task is None:
            raise SchemaError(f"task {task_id!r} has no variant for platform {platform_id!r}")
        return task

    def has_variant(self, task_id: str, platform_id: str) -> bool:
        return (task_id, platform_id) in self._by_key


def _parse_pin(raw: str, path: str | None) -> PinAssignment:
    m = _PIN_RE.match(raw.strip())
    if not m:
        raise SchemaError(f"pin entry {raw!r} must be 'peripheral/signal=descriptor'", path, "pins")
    return PinAssignment(
        peripheral=m.group("peripheral").strip(),
        signal=m.group("signal").strip(),
        descriptor=m.group("descriptor").strip(),
    )


def validate_task(task: TaskSpec, path: str | None = None) -> None:
    """Enforce TaskSpec invariants; raises on the first violation."""
    if task.level not in (1, 2, 3):
        raise SchemaError(f"level must be 1, 2 or 3, got {task.level}", path, "level")
    if not task.description.strip():
        raise SchemaError("description is empty", path, "description")
    if task.target not in PLATFORMS:
        raise SchemaError(f"unknown target platform {task.target!r}", path, "target")
    profile = PLATFORMS[task.target]
    for pin in task.pins:
        if pin.peripheral not in PERIPHERALS:
            raise UnknownPeripheral(f"pin {pin.signal!r} references unknown peripheral {pin.peripheral!r}", path, "pins")
        if not descriptor_matches(profile.pin_convention, pin.descriptor):
            raise PinConventionMismatch(
                f"descriptor {pin.descriptor!r} for signal {pin.signal!r} does not follow the "
                f"{profile.pin_convention.value} convention of {task.target}",
                path,
                "pins",
            )
    check = task.check
    if check.mode == "serial-pattern":
        if not check.pattern:
            raise SchemaError("serial-pattern check requires check-pattern", path, "check-pattern")
        try:
            re.compile(check.pattern)
        except re.error as exc:
            raise SchemaError(f"check-pattern is not a valid regex: {exc}", path, "check-pattern") from None
    elif check.mode == "human":
        if not check.checklist:
            raise SchemaError("human check requires a non-empty check-list", path, "check-list")
    else:
        raise SchemaError(f"check-mode must be 'human' or 'serial-pattern', got {check.mode!r}", path, "check-mode")


def parse_task(text: str, path: str | None = None) -> TaskSpec:
    lines = text.split("\n")
    if not lines or lines[0] != DELIMITER:
        raise SchemaError("first line must be '---'", path)
    try:
        closing = lines.index(DELIMITER, 1)
    except ValueError:
        raise SchemaError("unterminated header: no closing '---'", path) from None
    fields = parse_header_block(lines[1:closing], path)

    def scalar(key: str, required: bool = True) -> str:
        value = fields.get(key)
        if value is None:
            if required:
                raise SchemaError(f"missing field {key!r}", path, key)
            return ""
        if not isinstance(value, str):
            raise SchemaError(f"{key!r} must be a scalar", path, key)
        return value

    level_raw = scalar("level")
    try:
        level = int(level_raw)
    except ValueError:
        raise SchemaError(f"level must be an integer, got {level_raw!r}", path, "level") from None

    pins_raw = fields.get("pins", ())
    if isinstance(pins_raw, str):
        pins_raw = (pins_raw,) if pins_raw else ()
    pins = tuple(_parse_pin(entry, path) for entry in pins_raw)

    checklist = fields.get("check-list", ())
    if isinstance(checklist, str):
        checklist = (checklist,) if checklist else ()
    check = BehaviorCheck(
        mode=scalar("check-mode"),
        pattern=scalar("check-pattern", required=False) or None,
        checklist=tuple(checklist),
    )
    task = TaskSpec(
        id=scalar("id"),
        level=level,
        title=scalar("title"),
        description="\n".join(lines[closing + 1 :]).strip(),
        target=scalar("target"),
        pins=pins,
        check=check,
    )
    validate_task(task, path)
    return task


def task_files(corpus_dir: Path) -> list[Path]:
    return sorted(p for p in Path(corpus_dir).glob("*.task.md") if p.is_file())


def load_corpus(corpus_dir: Path) -> Corpus:
    """Load and validate every task file under a directory.

    Loading is order-independent: tasks are sorted by (id, target), so any
    on-disk ordering yields the same corpus.
    """
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.exists():
        raise SchemaError(f"corpus directory {corpus_dir} does not exist")
    tasks: list[TaskSpec] = []
    seen: dict[tuple[str, str], str] = {}
    levels: dict[str, tuple[int, str]] = {}
    for path in task_files(corpus_dir):
        task = parse_task(path.read_text(encoding="utf-8"), str(path))
        key = (task.id, task.target)
        if key in seen:
            raise SchemaError(f"duplicate task variant {key} (already in {seen[key]})", str(path))
        seen[key] = str(path)
        if task.id in levels and levels[task.id][0] != task.level:
            raise SchemaError(
                f"task {task.id!r} declares level {task.level} here but level "
                f"{levels[task.id][0]} in {levels[task.id][1]}",
                str(path),
                "level",
            )
        levels.setdefault(task.id, (task.level, str(path)))
        tasks.append(task)
    tasks.sort(key=lambda t: (t.id, t.target))
    return Corpus(tasks=tasks, source=corpus_dir)


@dataclass(frozen=True)
class CountMismatch:
    level: int
    expected: int
    got: int

    def __str__(self) -> str:
        return f"CountMismatch(level {self.level}, expected {self.expected}, got {self.got})"


def validate_corpus_shape(corpus: Corpus, expected: dict[int, int]) -> list[CountMismatch]:
    """Compare distinct task-id counts per level against an expected map."""
    counts: dict[int, int] = {}
    for task_id, level in corpus.levels().items():
        counts[level] = counts.get(level, 0) + 1
    mismatches = []
    for level in sorted(set(expected) | set(counts)):
        want, got = expected.get(level, 0), counts.get(level, 0)
        if want != got:
            mismatches.append(CountMismatch(level=level, expected=want, got=got))
    return mismatches


def _pin_line(pin: PinAssignment, convention: PinConvention) -> str:
    label = pin.signal.upper()
    if convention is PinConvention.GPIO_NUMBER:
        return f"{label}: GPIO {pin.descriptor}"
    if convention is PinConvention.DT_ALIAS:
        return f'{label}: devicetree alias "{pin.descriptor}" (node label bench_{pin.signal})'
    return f"{label}: pin {pin.descriptor}"


def render_task_prompt(task: TaskSpec, profile: PlatformProfile) -> str:
    """Render the deterministic task prompt handed to the model.

    Contains the platform+framework, the description, and one line per pin
    assignment in the platform's convention. Never contains skill content.
    """
    if task.target != profile.id:
        raise PlatformMismatch(f"task {task.id!r} targets {task.target!r}, not {profile.id!r}")
    lines = [
        f"Platform: {profile.mcu} + {profile.framework}",
        f"Task: {task.title}",
        "",
        task.description,
        "",
        "Pin assignments:",
    ]
    lines.extend(_pin_line(pin, profile.pin_convention) for pin in task.pins)
    if profile.pin_convention is PinConvention.DT_ALIAS and task.pins:
        lines.append(
            "The project overlay declares each alias above; reference pins through "
            "their devicetree aliases, not numeric pin numbers."
        )
    return "\n".join(lines) + "\n"
