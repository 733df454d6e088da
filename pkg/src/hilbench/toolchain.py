"""Toolchain invocation: compile and flash bundles, capture serial output.

Profiles map a platform id to compile/flash command vectors containing a
"{workspace}" placeholder (exactly once). Commands run as argv vectors,
never through a shell, so bundle contents cannot be shell-interpreted.
Stub profiles point the same templates at local scripts, which makes the
whole harness runnable with no hardware and no SDKs; callers cannot tell
the difference.

Version pins for the real toolchains are recorded in the profile and
warned about, not enforced.
"""

from __future__ import annotations

import logging
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from .assembler import ProjectBundle
from .errors import PortUnavailable, ProfileMismatch, WorkspaceError

log = logging.getLogger(__name__)

DEFAULT_COMPILE_TIMEOUT_S = 600.0
DEFAULT_FLASH_TIMEOUT_S = 120.0

PLACEHOLDER = "{workspace}"

# Informational pins for the real toolchains; mismatches warn, never block.
PINNED_VERSIONS = {
    "atmega2560+arduino": "Arduino CLI v1.4.1, core arduino:avr v1.8.7",
    "esp32s3+espidf": "ESP-IDF v5.1.2",
    "nrf52840+zephyr": "nRF Connect SDK v2.7.0",
}


@dataclass(frozen=True)
class ToolchainProfile:
    platform_id: str
    compile_cmd: tuple[str, ...]
    flash_cmd: tuple[str, ...]
    versions: str = ""
    compile_timeout_s: float = DEFAULT_COMPILE_TIMEOUT_S
    flash_timeout_s: float = DEFAULT_FLASH_TIMEOUT_S
    serial_port: str | None = None
    serial_baud: int = 115200
    stub_transcript: str | None = None

    def __post_init__(self) -> None:
        for name, cmd in (("compile", self.compile_cmd), ("flash", self.flash_cmd)):
            count = sum(arg.count(PLACEHOLDER) for arg in cmd)
            if count != 1:
                raise ValueError(f"{name} command must contain {PLACEHOLDER!r} exactly once, found {count}")


@dataclass(frozen=True)
class BuildResult:
    status: str  # "ok" | "compile-failure"
    log: str
    duration_s: float
    exit_code: int | None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_dict(self) -> dict:
        return {"status": self.status, "log": self.log, "duration_s": self.duration_s, "exit_code": self.exit_code}

    @classmethod
    def from_dict(cls, data: dict) -> "BuildResult":
        return cls(data["status"], data["log"], data["duration_s"], data["exit_code"])


@dataclass(frozen=True)
class FlashResult:
    status: str  # "ok" | "flash-failure"
    log: str
    duration_s: float
    exit_code: int | None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_dict(self) -> dict:
        return {"status": self.status, "log": self.log, "duration_s": self.duration_s, "exit_code": self.exit_code}

    @classmethod
    def from_dict(cls, data: dict) -> "FlashResult":
        return cls(data["status"], data["log"], data["duration_s"], data["exit_code"])


def expand_command(cmd: tuple[str, ...], workspace: Path) -> list[str]:
    return [arg.replace(PLACEHOLDER, str(workspace)) for arg in cmd]


def materialize(bundle: ProjectBundle, workspace: Path) -> Path:
    """Write a bundle's files under a workspace directory."""
    workspace = Path(workspace)
    try:
        workspace.mkdir(parents=True, exist_ok=True)
        for rel, content in bundle.files:
            target = workspace / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
    except OSError as exc:
        raise WorkspaceError(f"failed to materialize bundle under {workspace}: {exc}") from exc
    return workspace


def _run(cmd: list[str], timeout_s: float) -> tuple[int | None, str, float]:
    started = time.monotonic()
    try:
        proc = subprocess.run(
            cmd,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            timeout=timeout_s,
            text=True,
            errors="replace",
        )
        return proc.returncode, proc.stdout, time.monotonic() - started
    except subprocess.TimeoutExpired as exc:
        output = exc.stdout.decode(errors="replace") if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        return None, output + f"\nTimeout: command exceeded {timeout_s:.0f} s", time.monotonic() - started
    except FileNotFoundError as exc:
        raise WorkspaceError(f"toolchain command not found: {exc.filename}") from exc


def compile_bundle(bundle: ProjectBundle, profile: ToolchainProfile, workspace: Path) -> BuildResult:
    """Materialize and compile a bundle; nonzero exit or timeout is CF."""
    if bundle.platform_id != profile.platform_id:
        raise ProfileMismatch(f"bundle targets {bundle.platform_id!r}, profile is {profile.platform_id!r}")
    if profile.versions and profile.platform_id in PINNED_VERSIONS:
        pinned = PINNED_VERSIONS[profile.platform_id]
        if profile.versions != pinned:
            log.warning("toolchain versions %r differ from pinned %r", profile.versions, pinned)
    materialize(bundle, workspace)
    exit_code, output, duration = _run(expand_command(profile.compile_cmd, workspace), profile.compile_timeout_s)
    status = "ok" if exit_code == 0 else "compile-failure"
    return BuildResult(status=status, log=output, duration_s=duration, exit_code=exit_code)


def flash(workspace: Path, profile: ToolchainProfile) -> FlashResult:
    """Flash a compiled workspace; failures feed CF classification."""
    exit_code, output, duration = _run(expand_command(profile.flash_cmd, Path(workspace)), profile.flash_timeout_s)
    status = "ok" if exit_code == 0 else "flash-failure"
    return FlashResult(status=status, log=output, duration_s=duration, exit_code=exit_code)


@dataclass(frozen=True)
class SerialTranscript:
    lines: tuple[tuple[float, str], ...]

    @property
    def text(self) -> str:
        return "\n".join(line for _, line in self.lines)

    def as_dict(self) -> dict:
        return {"lines": [[offset, line] for offset, line in self.lines]}


def capture_serial(profile: ToolchainProfile, duration_s: float) -> SerialTranscript:
    """Capture serial console output for up to duration_s seconds.

    Stub profiles provide a canned transcript (timestamped at one line per
    100 ms); live capture needs pyserial and a configured port.
    """
    if duration_s <= 0:
        return SerialTranscript(lines=())
    if profile.stub_transcript is not None:
        lines = tuple(
            (round(i * 0.1, 3), line)
            for i, line in enumerate(profile.stub_transcript.splitlines())
            if i * 0.1 < duration_s
        )
        return SerialTranscript(lines=lines)
    if not profile.serial_port:
        raise PortUnavailable("no serial port configured and no stub transcript provided")
    try:
        import serial  # optional dependency, live capture only
    except ImportError as exc:
        raise PortUnavailable("pyserial is not installed; cannot open a live port") from exc
    try:
        port = serial.Serial(profile.serial_port, profile.serial_baud, timeout=0.5)
    except Exception as exc:
        raise PortUnavailable(f"cannot open {profile.serial_port}: {exc}") from exc
    lines: list[tuple[float, str]] = []
    started = time.monotonic()
    with port:
        while time.monotonic() - started < duration_s:
            raw = port.readline()
            if raw:
                lines.append((round(time.monotonic() - started, 3), raw.decode(errors="replace").rstrip("\r\n")))
    return SerialTranscript(lines=tuple(lines))


def load_profiles(path: Path) -> dict[str, ToolchainProfile]:
    """Read the profile configuration file (platform id -> command templates)."""
    import json

    data = json.loads(Path(path).read_text(encoding="utf-8"))
    profiles = {}
    for platform_id, entry in data.items():
        profiles[platform_id] = ToolchainProfile(
            platform_id=platform_id,
            compile_cmd=tuple(entry["compile"]),
            flash_cmd=tuple(entry["flash"]),
            versions=entry.get("versions", ""),
            compile_timeout_s=float(entry.get("compile_timeout_s", DEFAULT_COMPILE_TIMEOUT_S)),
            flash_timeout_s=float(entry.get("flash_timeout_s", DEFAULT_FLASH_TIMEOUT_S)),
            serial_port=entry.get("serial_port"),
            serial_baud=int(entry.get("serial_baud", 115200)),
            stub_transcript=entry.get("stub_transcript"),
        )
    return profiles


_STUB_COMPILE = """#!/bin/sh
# Exit 1 if any materialized source asks for a forced failure; else 0.
if grep -rq "FORCE_COMPILE_FAILURE" "$1" 2>/dev/null; then
    echo "error: forced compile failure marker found"
    exit 1
fi
echo "stub compile ok: $1"
exit 0
"""

_STUB_FLASH = """#!/bin/sh
if grep -rq "FORCE_FLASH_FAILURE" "$1" 2>/dev/null; then
    echo "no device found (forced flash failure)"
    exit 2
fi
echo "stub flash ok: $1"
exit 0
"""


def make_stub_profile(
    platform_id: str,
    script_dir: Path,
    stub_transcript: str | None = None,
    compile_timeout_s: float = 30.0,
    flash_timeout_s: float = 30.0,
) -> ToolchainProfile:
    """Write stub compile/flash scripts and return a profile using them.

    The scripts honor FORCE_COMPILE_FAILURE / FORCE_FLASH_FAILURE markers
    embedded in the materialized sources, so failure paths are data-driven.
    """
    script_dir = Path(script_dir)
    script_dir.mkdir(parents=True, exist_ok=True)
    compile_script = script_dir / "stub-compile.sh"
    flash_script = script_dir / "stub-flash.sh"
    compile_script.write_text(_STUB_COMPILE, encoding="utf-8")
    flash_script.write_text(_STUB_FLASH, encoding="utf-8")
    compile_script.chmod(0o755)
    flash_script.chmod(0o755)
    return ToolchainProfile(
        platform_id=platform_id,
        compile_cmd=("/bin/sh", str(compile_script), PLACEHOLDER),
        flash_cmd=("/bin/sh", str(flash_script), PLACEHOLDER),
        versions="",
        compile_timeout_s=compile_timeout_s,
        flash_timeout_s=flash_timeout_s,
        stub_transcript=stub_transcript,
    )
