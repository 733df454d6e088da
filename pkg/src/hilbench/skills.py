"""Skill documents: parsing, serialization, indexing, and lookup.

A skill file is a metadata header plus a prose body, one skill per ".md"
file. The header is a restricted key-value grammar, deliberately smaller
than YAML so parsing is bit-exact:

    line 1:      "---"
    header line: "key: value"            (scalar, single line)
              or "key: [a, b, c]"        (flat list; items free of commas/brackets)
    closing:     "---"
    remainder:   body, verbatim

Required keys are ``name`` and ``description``; ``platforms``,
``peripherals`` and ``origin`` are optional. Unknown keys survive a
parse/serialize round trip in ``extras``. No nesting, no anchors, no
multi-line scalars.

Retrieval never needs bodies: ``scan_headers`` stops reading each file at
the closing delimiter, and ``render_header_index`` turns the headers into
the compact listing handed to the planner.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .errors import (
    EmptyBody,
    LibraryError,
    MalformedHeader,
    MissingFrontmatter,
    MissingRequiredField,
    UnknownSkillName,
)

DELIMITER = "---"
ORIGINS = ("human-expert", "llm-generated")
_KNOWN_KEYS = ("name", "description", "platforms", "peripherals", "origin")
_NON_ALNUM_RUN = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class SkillHeader:
    """Skill metadata; everything retrieval needs, nothing more."""

    name: str
    description: str
    platforms: frozenset[str] = frozenset()
    peripherals: frozenset[str] = frozenset()
    origin: str | None = None
    extras: tuple[tuple[str, str | tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class Skill:
    header: SkillHeader
    body: str

    @property
    def name(self) -> str:
        return self.header.name


@dataclass(frozen=True)
class Diagnostic:
    """One validation or scan finding; never an exception."""

    code: str
    message: str
    path: str | None = None
    skill: str | None = None

    def __str__(self) -> str:
        where = self.skill or self.path or ""
        return f"{self.code}: {where}: {self.message}" if where else f"{self.code}: {self.message}"


@dataclass
class SkillLibrary:
    """Ordered, name-unique collection of skills loaded from one directory."""

    skills: list[Skill]
    source: Path

    def __post_init__(self) -> None:
        by_norm: dict[str, str] = {}
        for s in self.skills:
            norm = normalize_name(s.name)
            if norm in by_norm:
                raise LibraryError(
                    f"duplicate skill name {s.name!r} (collides with {by_norm[norm]!r}) in {self.source}"
                )
            by_norm[norm] = s.name
        self._by_norm = {normalize_name(s.name): s for s in self.skills}

    @property
    def headers(self) -> list[SkillHeader]:
        return [s.header for s in self.skills]

    def get(self, name: str) -> Skill:
        match = self._by_norm.get(normalize_name(name))
        if match is None:
            raise UnknownSkillName(f"no skill matching {name!r} in {self.source}")
        return match


def normalize_name(name: str) -> str:
    """Lowercase and collapse non-alphanumeric runs to single hyphens.

    This is the only fuzziness allowed when matching manager output or
    lookup requests to skill names; there is no edit-distance matching.
    """
    return _NON_ALNUM_RUN.sub("-", name.lower()).strip("-")


def _parse_value(raw: str) -> str | tuple[str, ...]:
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        inner = raw[1:-1].strip()
        if not inner:
            return ()
        return tuple(item.strip() for item in inner.split(","))
    return raw


def _format_value(value: str | Iterable[str]) -> str:
    if isinstance(value, str):
        return value
    return "[" + ", ".join(sorted(value)) + "]"


def parse_header_block(lines: list[str], path: str | None = None) -> dict[str, str | tuple[str, ...]]:
    """Parse the raw lines between the delimiters into a key-value map."""
    fields: dict[str, str | tuple[str, ...]] = {}
    for n, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        if ":" not in line:
            raise MalformedHeader(f"line {n}: expected 'key: value', got {line!r}", path)
        key, _, raw = line.partition(":")
        key = key.strip()
        if not key:
            raise MalformedHeader(f"line {n}: empty key", path)
        if key in fields:
            raise MalformedHeader(f"line {n}: duplicate key {key!r}", path)
        fields[key] = _parse_value(raw)
    return fields


def _header_from_fields(fields: dict[str, str | tuple[str, ...]], path: str | None) -> SkillHeader:
    for required in ("name", "description"):
        value = fields.get(required)
        if value is None or not str(value).strip():
            raise MissingRequiredField(f"header is missing {required!r}", path)
    name = fields["name"]
    description = fields["description"]
    if not isinstance(name, str) or not isinstance(description, str):
        raise MalformedHeader("name and description must be scalars", path)

    def as_set(key: str) -> frozenset[str]:
        value = fields.get(key, ())
        if isinstance(value, str):
            value = (value,) if value else ()
        return frozenset(value)

    origin = fields.get("origin")
    if origin is not None and origin not in ORIGINS:
        raise MalformedHeader(f"origin must be one of {ORIGINS}, got {origin!r}", path)
    extras = tuple(sorted((k, v) for k, v in fields.items() if k not in _KNOWN_KEYS))
    return SkillHeader(
        name=name,
        description=description,
        platforms=as_set("platforms"),
        peripherals=as_set("peripherals"),
        origin=origin if isinstance(origin, str) else None,
        extras=extras,
    )


def read_header_lines(stream: IO[str], path: str | None = None) -> list[str]:
    """Consume header lines from a stream, stopping at the closing delimiter.

    Reads nothing past the closing "---": callers scanning large libraries
    never pay for bodies.
    """
    first = stream.readline()
    if first.rstrip("\n") != DELIMITER:
        raise MissingFrontmatter("first line must be '---'", path)
    lines: list[str] = []
    while True:
        line = stream.readline()
        if line == "":
            raise MalformedHeader("unterminated header: no closing '---'", path)
        if line.rstrip("\n") == DELIMITER:
            return lines
        lines.append(line.rstrip("\n"))


def parse_skill(text: str, path: str | None = None) -> Skill:
    """Parse one skill document from raw file content."""
    lines = text.split("\n")
    if not lines or lines[0] != DELIMITER:
        raise MissingFrontmatter("first line must be '---'", path)
    try:
        closing = lines.index(DELIMITER, 1)
    except ValueError:
        raise MalformedHeader("unterminated header: no closing '---'", path) from None
    fields = parse_header_block(lines[1:closing], path)
    header = _header_from_fields(fields, path)
    body = "\n".join(lines[closing + 1 :])
    if not body.strip():
        raise EmptyBody("skill body is empty", path)
    return Skill(header=header, body=body)


def serialize_skill(skill: Skill) -> str:
    """Render a skill to its canonical file form; inverse of parse_skill.

    List-valued fields are written sorted, so serialization is a pure
    function of the skill value.
    """
    h = skill.header
    pairs: list[tuple[str, str | Iterable[str]]] = [("name", h.name), ("description", h.description)]
    if h.platforms:
        pairs.append(("platforms", h.platforms))
    if h.peripherals:
        pairs.append(("peripherals", h.peripherals))
    if h.origin:
        pairs.append(("origin", h.origin))
    pairs.extend(h.extras)
    for key, value in pairs:
        _check_serializable(key, value)
    header_lines = [f"{key}: {_format_value(value)}" for key, value in pairs]
    return "\n".join([DELIMITER, *header_lines, DELIMITER, skill.body])


def _check_serializable(key: str, value: str | Iterable[str]) -> None:
    if "\n" in key or ":" in key:
        raise ValueError(f"header key {key!r} not representable")
    items = [value] if isinstance(value, str) else list(value)
    for item in items:
        if "\n" in item:
            raise ValueError(f"header value for {key!r} contains a newline")
        if not isinstance(value, str) and ("," in item or "]" in item or "[" in item):
            raise ValueError(f"list item {item!r} for {key!r} not representable")
    if isinstance(value, str) and value.startswith("[") and value.endswith("]"):
        raise ValueError(f"scalar value for {key!r} would parse back as a list")


def skill_files(library_dir: Path) -> list[Path]:
    return sorted(p for p in Path(library_dir).glob("*.md") if p.is_file())


@dataclass
class ScanResult:
    headers: list[SkillHeader]
    diagnostics: list[Diagnostic]


def scan_headers(library_dir: Path) -> ScanResult:
    """Read every skill header in a directory without loading bodies.

    Per-file parse failures become diagnostics; the scan never aborts.
    """
    headers: list[SkillHeader] = []
    diagnostics: list[Diagnostic] = []
    for path in skill_files(library_dir):
        try:
            with open(path, encoding="utf-8") as stream:
                lines = read_header_lines(stream, str(path))
            fields = parse_header_block(lines, str(path))
            headers.append(_header_from_fields(fields, str(path)))
        except (MissingFrontmatter, MalformedHeader, MissingRequiredField) as exc:
            diagnostics.append(Diagnostic(code=type(exc).__name__, message=str(exc), path=str(path)))
    return ScanResult(headers=headers, diagnostics=diagnostics)


def load_library(library_dir: Path) -> SkillLibrary:
    """Load all skills (headers and bodies) from a directory.

    Raises on any malformed file or duplicate name; use validate_library
    for the permissive, diagnostic-collecting path.
    """
    library_dir = Path(library_dir)
    skills = [parse_skill(p.read_text(encoding="utf-8"), str(p)) for p in skill_files(library_dir)]
    return SkillLibrary(skills=skills, source=library_dir)


def load_bodies(library: SkillLibrary, names: list[str]) -> list[Skill]:
    """Return full skills for the requested names, in request order."""
    return [library.get(name) for name in names]


def render_header_index(headers: Iterable[SkillHeader]) -> str:
    """Render the compact per-line index the planner sees.

    One line per skill, sorted by name:
    "name — description [platforms] [peripherals]", with the bracketed
    segments omitted when empty. Pure function of the header set.
    """
    lines = []
    for h in sorted(headers, key=lambda h: h.name):
        parts = [f"{h.name} — {h.description}"]
        if h.platforms:
            parts.append("[" + ", ".join(sorted(h.platforms)) + "]")
        if h.peripherals:
            parts.append("[" + ", ".join(sorted(h.peripherals)) + "]")
        lines.append(" ".join(parts))
    return "\n".join(lines)


def estimate_tokens(text: str) -> int:
    """Rough token count: ceil(len/4).

    Display and index-economy checks only; reported metrics always come
    from provider usage metadata.
    """
    return math.ceil(len(text) / 4)


MAX_DESCRIPTION_LENGTH = 512


def validate_library(library_dir: Path) -> list[Diagnostic]:
    """Collect library problems without failing: duplicate names, unknown
    platform/peripheral ids, empty bodies, oversized descriptions."""
    from .peripherals import PERIPHERALS
    from .platforms import PLATFORMS

    diagnostics: list[Diagnostic] = []
    seen: dict[str, str] = {}
    for path in skill_files(library_dir):
        try:
            skill = parse_skill(path.read_text(encoding="utf-8"), str(path))
        except EmptyBody as exc:
            diagnostics.append(Diagnostic("EmptyBody", str(exc), path=str(path)))
            continue
        except (MissingFrontmatter, MalformedHeader, MissingRequiredField) as exc:
            diagnostics.append(Diagnostic(type(exc).__name__, str(exc), path=str(path)))
            continue
        h = skill.header
        norm = normalize_name(h.name)
        if norm in seen:
            diagnostics.append(
                Diagnostic("DuplicateName", f"{h.name!r} already defined in {seen[norm]}", path=str(path), skill=h.name)
            )
        else:
            seen[norm] = str(path)
        for platform in sorted(h.platforms):
            if platform not in PLATFORMS:
                diagnostics.append(
                    Diagnostic("UnknownPlatform", f"{platform!r} is not registered", path=str(path), skill=h.name)
                )
        for peripheral in sorted(h.peripherals):
            if peripheral not in PERIPHERALS:
                diagnostics.append(
                    Diagnostic("UnknownPeripheral", f"{peripheral!r} is not registered", path=str(path), skill=h.name)
                )
        if len(h.description) > MAX_DESCRIPTION_LENGTH:
            diagnostics.append(
                Diagnostic(
                    "OversizedDescription",
                    f"description is {len(h.description)} characters (max {MAX_DESCRIPTION_LENGTH})",
                    path=str(path),
                    skill=h.name,
                )
            )
    return diagnostics
