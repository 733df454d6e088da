"""LLM-based skill generation: turn a task subset into skill documents.

One provider call per invocation. The response is mined for skill
documents: every fenced block that parses as a skill file is taken as-is;
fenced blocks that look like prose-with-a-title get a synthesized header.
Either way the result is stamped origin=llm-generated and written one
file per skill. If nothing recognizable comes back, the raw response is
persisted next to the output directory for inspection.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import TaskSpec
from .errors import SkillParseError, UnparseableGeneration
from .providers import GenerationParams, Provider, ProviderRequest, TokenUsage
from .skills import Skill, SkillHeader, normalize_name, parse_skill, serialize_skill

log = logging.getLogger(__name__)

GENERATION_SYSTEM_PROMPT = (
    "You are an embedded systems knowledge engineer. You write compact, reusable "
    "skill documents for firmware-generation agents. Each document starts with a "
    "'---' frontmatter block (name, description, optional platforms/peripherals) "
    "followed by a markdown body. Return each document in its own fenced code block."
)

GENERATION_PROMPT_TEMPLATE = """Read tasks in {level_files}, please follow these steps:

1. Analyze the task requirements and identify what domain knowledge, hardware platforms, or connectivity protocols, etc, are needed.

2. Consider implementation based on three MCU + development framework combinations: 1) ESP32 + ESP-IDF, 2) ATMega2560 + Arduino, 3) nRF52840 + Zephyr.

3. Write modular skill documents that would help solve these tasks. Each skill should: focus on a specific MCU, board, IoT tool, protocol, framework, or embedded technique; provide code examples and usage patterns; be reusable for similar tasks.

4. Save each skill as a markdown file in the skills-llm-generated/ directory with a descriptive name.
"""

_FENCE_BLOCK_RE = re.compile(r"^\s*```[^\n]*\n(.*?)^\s*```\s*$", re.MULTILINE | re.DOTALL)
_HEADING_RE = re.compile(r"^#+\s*(.+)$", re.MULTILINE)


def render_generation_prompt(tasks: list[TaskSpec]) -> str:
    """The generation user message: template plus inlined task texts.

    The template reads as if tasks lived in per-level files; since the
    provider contract is chat-only, the task descriptions are appended
    under matching headings.
    """
    if not tasks:
        raise ValueError("skill generation needs at least one task")
    levels = sorted({t.level for t in tasks})
    level_files = ", ".join(f"tasks/level{level}.txt" for level in levels)
    sections = [GENERATION_PROMPT_TEMPLATE.format(level_files=level_files)]
    for level in levels:
        sections.append(f"tasks/level{level}.txt:")
        seen: set[str] = set()
        for task in tasks:
            if task.level != level or task.id in seen:
                continue
            seen.add(task.id)
            sections.append(f"- {task.title}: {task.description}")
        sections.append("")
    return "\n".join(sections)


def _synthesize_header(content: str, index: int) -> SkillHeader | None:
    """Build a header for a document that lacks frontmatter."""
    body = content.strip()
    if not body:
        return None
    heading = _HEADING_RE.search(body)
    if heading:
        name = normalize_name(heading.group(1))
        description = heading.group(1).strip()
    else:
        first_line = body.splitlines()[0].strip()
        if len(first_line) < 8:  # too short to be a meaningful title
            return None
        name = normalize_name(first_line)[:64].strip("-") or f"generated-skill-{index}"
        description = first_line[:120]
    if not name:
        name = f"generated-skill-{index}"
    return SkillHeader(name=name, description=description, origin="llm-generated")


def _stamp_origin(skill: Skill) -> Skill:
    header = skill.header
    if header.origin == "llm-generated":
        return skill
    return Skill(
        header=SkillHeader(
            name=header.name,
            description=header.description,
            platforms=header.platforms,
            peripherals=header.peripherals,
            origin="llm-generated",
            extras=header.extras,
        ),
        body=skill.body,
    )


def parse_generated_skills(response: str) -> list[Skill]:
    """Extract skill documents from a generation response.

    Preference order per fenced block: a valid skill file verbatim, then a
    wrapped document with a synthesized header. A fence-free response that
    parses as a single skill file also counts.
    """
    skills: list[Skill] = []
    seen: set[str] = set()

    def add(skill: Skill) -> None:
        skill = _stamp_origin(skill)
        if skill.name not in seen:
            seen.add(skill.name)
            skills.append(skill)

    blocks = [m.group(1) for m in _FENCE_BLOCK_RE.finditer(response)]
    for index, block in enumerate(blocks, start=1):
        block = block.strip("\n")
        try:
            add(parse_skill(block))
            continue
        except SkillParseError:
            pass
        header = _synthesize_header(block, index)
        if header is not None and block.strip():
            add(Skill(header=header, body=block.strip()))
    if not blocks:
        try:
            add(parse_skill(response.strip()))
        except SkillParseError:
            pass
    return skills


@dataclass
class GenerationResult:
    written: list[Path]
    usage: TokenUsage
    raw_response_path: Path | None = None


def generate_skills(
    tasks: list[TaskSpec],
    provider: Provider,
    output_dir: Path,
    model: str = "default",
    params: GenerationParams = GenerationParams(),
) -> GenerationResult:
    """Generate skill files for a task subset and write them to a directory."""
    request = ProviderRequest(
        system=GENERATION_SYSTEM_PROMPT,
        messages=(render_generation_prompt(tasks),),
        model=model,
        params=params,
    )
    response = provider.complete(request)
    skills = parse_generated_skills(response.text)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    if not skills:
        raw_path = output_dir / "generation-response.raw.txt"
        raw_path.write_text(response.text, encoding="utf-8")
        raise UnparseableGeneration(
            f"no recognizable skill documents in response; raw response saved to {raw_path}"
        )
    written = []
    for skill in skills:
        path = output_dir / f"{skill.name}.md"
        path.write_text(serialize_skill(skill), encoding="utf-8")
        written.append(path)
        log.info("wrote generated skill %s", path)
    return GenerationResult(written=written, usage=response.usage)
