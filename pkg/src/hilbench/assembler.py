"""Deterministic project assembly: raw model output -> ready-to-compile tree.

Extraction picks the longest fenced code block (models like to wrap code
in prose); if there are no fences at all, the whole text is accepted only
when it plausibly is source code. Assembly then lays the code into the
platform's mandated file set, generating CMake scaffolding, the Zephyr
prj.conf (bus subsystems inferred from the task's peripheral interfaces)
and a devicetree overlay mapping each pin assignment to an alias.

Everything here is a pure function of (platform, source, task): no model
calls, no clock, no randomness. Scaffolding templates live as assets
under templates/ and are parameterized only by task id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .corpus import PinAssignment, TaskSpec
from .errors import InvalidDescriptor, NoCodeFound, UnsupportedPlatform
from .peripherals import Interface, get_peripheral
from .platforms import PinConvention, PlatformProfile

_FENCE_RE = re.compile(r"^\s*```")

# Platform id -> exact relative file set every bundle must contain.
PLATFORM_LAYOUTS = {
    "atmega2560+arduino": ("{task}/{task}.ino",),
    "esp32s3+espidf": ("CMakeLists.txt", "main/CMakeLists.txt", "main/main.c"),
    "nrf52840+zephyr": ("CMakeLists.txt", "prj.conf", "app.overlay", "src/main.c"),
}

_SOURCE_HINTS = (
    re.compile(r"^\s*#\s*(include|define|if|ifdef|ifndef|endif|pragma)"),
    re.compile(r"[;{}]\s*$"),
    re.compile(r"\b(int|void)\s+main\s*\("),
    re.compile(r"\bvoid\s+(setup|loop|app_main)\s*\("),
)


@dataclass(frozen=True)
class ExtractedSource:
    code: str
    language: str = ""
    note: str = ""


@dataclass(frozen=True)
class ProjectBundle:
    platform_id: str
    files: tuple[tuple[str, str], ...]  # (relative path, content), ordered
    entry: str

    @property
    def file_map(self) -> dict[str, str]:
        return dict(self.files)

    def as_dict(self) -> dict:
        return {"platform": self.platform_id, "entry": self.entry, "files": self.file_map}

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectBundle":
        return cls(
            platform_id=data["platform"],
            files=tuple(sorted(data["files"].items())),
            entry=data["entry"],
        )


def _fenced_blocks(text: str) -> list[tuple[str, str]]:
    """Return (language tag, content) for each fenced block, in order.

    An unterminated final fence swallows the rest of the text; better to
    salvage truncated output than to drop it.
    """
    blocks: list[tuple[str, str]] = []
    lines = text.split("\n")
    open_tag: str | None = None
    content: list[str] = []
    for line in lines:
        if _FENCE_RE.match(line):
            if open_tag is None:
                open_tag = line.strip().lstrip("`").strip()
                content = []
            else:
                blocks.append((open_tag, "\n".join(content)))
                open_tag = None
        elif open_tag is not None:
            content.append(line)
    if open_tag is not None:
        blocks.append((open_tag, "\n".join(content)))
    return blocks


def _looks_like_source(text: str) -> bool:
    hits = 0
    for line in text.split("\n"):
        if any(h.search(line) for h in _SOURCE_HINTS):
            hits += 1
            if hits >= 3:
                return True
    return False


def extract_code(raw: str) -> ExtractedSource:
    """Pull the firmware source out of raw model output.

    Longest fenced block wins; with no fences, the whole text is used only
    if it looks like source. Extra blocks are discarded (single-file
    coder contract) and the note records what happened.
    """
    blocks = [(tag, content) for tag, content in _fenced_blocks(raw) if content.strip()]
    if blocks:
        index, (tag, content) = max(enumerate(blocks), key=lambda item: len(item[1][1]))
        note = f"fenced block {index + 1} of {len(blocks)} (longest)"
        if len(blocks) > 1:
            note += "; other blocks discarded"
        return ExtractedSource(code=content.strip("\n") + "\n", language=tag, note=note)
    if any(_FENCE_RE.match(line) for line in raw.split("\n")):
        # The whole-text fallback is only for fence-free output; fences
        # with nothing in them mean the model produced no code.
        raise NoCodeFound("fenced blocks present but all empty")
    if _looks_like_source(raw):
        return ExtractedSource(code=raw.strip("\n") + "\n", language="", note="whole text (no fences)")
    raise NoCodeFound("no fenced code block and the text does not resemble source")


def _template(name: str) -> str:
    return resources.files("hilbench.templates").joinpath(name).read_text(encoding="utf-8")


def task_interfaces(task: TaskSpec) -> set[Interface]:
    used: set[Interface] = set()
    for pin in task.pins:
        used.update(get_peripheral(pin.peripheral).interfaces)
    return used


def render_prj_conf(task: TaskSpec) -> str:
    """Zephyr prj.conf: fixed baseline plus I2C/SPI iff the task uses them."""
    conf = _template("zephyr_prj.conf")
    used = task_interfaces(task)
    if Interface.I2C in used:
        conf += "CONFIG_I2C=y\n"
    if Interface.SPI in used:
        conf += "CONFIG_SPI=y\n"
    return conf


def generate_overlay(pins: tuple[PinAssignment, ...], board: str = "nrf52840") -> str:
    """Devicetree overlay declaring one alias + node per pin assignment.

    Naming scheme: the alias is the task descriptor verbatim; generated
    node labels are "bench_" + signal (hyphens folded to underscores).
    Inputs become gpio-keys children, everything else gpio-leds. Pins are
    ordered by signal name so the overlay is stable.
    """
    header = f"/* Generated pin mapping for {board}. */\n"
    if not pins:
        return header + "/ {\n};\n"
    aliases: list[str] = []
    out_nodes: list[str] = []
    in_nodes: list[str] = []
    for index, pin in enumerate(sorted(pins, key=lambda p: p.signal)):
        if pin.descriptor.isdigit():
            raise InvalidDescriptor(
                f"descriptor {pin.descriptor!r} for signal {pin.signal!r} is numeric; "
                "Zephyr pins are referenced by devicetree alias"
            )
        label = "bench_" + re.sub(r"[^a-z0-9_]", "_", pin.signal.lower())
        if pin.descriptor.startswith("/"):
            aliases.append(f"\t\t{pin.signal} = \"{pin.descriptor}\";")
            continue
        aliases.append(f"\t\t{pin.descriptor} = &{label};")
        peripheral = get_peripheral(pin.peripheral)
        node = (
            f"\t\t{label}: {label} {{\n"
            f"\t\t\tgpios = <&gpio0 {index} GPIO_ACTIVE_HIGH>;\n"
            f"\t\t\tlabel = \"{pin.signal.upper()}\";\n"
            f"\t\t}};"
        )
        if peripheral.interfaces == (Interface.GPIO_IN,):
            in_nodes.append(node)
        else:
            out_nodes.append(node)
    sections = ["\taliases {", *aliases, "\t};"]
    if out_nodes:
        sections += ["", "\tbench_outputs {", "\t\tcompatible = \"gpio-leds\";", *out_nodes, "\t};"]
    if in_nodes:
        sections += ["", "\tbench_inputs {", "\t\tcompatible = \"gpio-keys\";", *in_nodes, "\t};"]
    return header + "/ {\n" + "\n".join(sections) + "\n};\n"


def assemble(profile: PlatformProfile, source: ExtractedSource, task: TaskSpec) -> ProjectBundle:
    """Build the complete project bundle for a platform.

    The file set is exactly the platform's mandated layout; running twice
    on the same inputs yields byte-identical bundles.
    """
    if profile.id not in PLATFORM_LAYOUTS:
        raise UnsupportedPlatform(f"no project layout for platform {profile.id!r}")
    code = source.code
    if profile.id == "atmega2560+arduino":
        entry = f"{task.id}/{task.id}.ino"
        files = ((entry, code),)
    elif profile.id == "esp32s3+espidf":
        entry = "main/main.c"
        files = (
            ("CMakeLists.txt", _template("espidf_top.cmake").replace("@TASK_ID@", task.id)),
            ("main/CMakeLists.txt", _template("espidf_main.cmake")),
            (entry, code),
        )
    else:  # nrf52840+zephyr
        if profile.pin_convention is not PinConvention.DT_ALIAS:
            raise UnsupportedPlatform(f"unexpected pin convention for {profile.id}")
        entry = "src/main.c"
        files = (
            ("CMakeLists.txt", _template("zephyr_top.cmake").replace("@TASK_ID@", task.id)),
            ("prj.conf", render_prj_conf(task)),
            ("app.overlay", generate_overlay(task.pins, board=profile.mcu.lower())),
            (entry, code),
        )
    return ProjectBundle(platform_id=profile.id, files=files, entry=entry)
