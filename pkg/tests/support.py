"""Shared helpers for the test suite and the golden-file generator."""

from __future__ import annotations

import re
from pathlib import Path

from hilbench.assembler import ExtractedSource
from hilbench.corpus import TaskSpec
from hilbench.pipeline import MANAGER_SYSTEM_PROMPT
from hilbench.providers import ProviderRequest, ProviderResponse, TokenUsage
from hilbench.skills import estimate_tokens

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

PLATFORM_SHORT = {
    "atmega2560+arduino": "arduino",
    "esp32s3+espidf": "espidf",
    "nrf52840+zephyr": "zephyr",
}


def canonical_source(task: TaskSpec) -> ExtractedSource:
    """The fixed source used for golden bundles: deterministic per task."""
    code = (
        f"/* firmware for task {task.id} on {task.target} */\n"
        "#include <stdint.h>\n"
        "\n"
        "int main(void) {\n"
        "    for (;;) {\n"
        "    }\n"
        "    return 0;\n"
        "}\n"
    )
    return ExtractedSource(code=code, language="c", note="golden")


def default_coder_text(request: ProviderRequest) -> str:
    """Deterministic coder output: prose around one fenced block."""
    prompt = request.messages[0]
    task_line = next((l for l in prompt.splitlines() if l.startswith("Task: ")), "Task: unknown")
    platform_line = next((l for l in prompt.splitlines() if l.startswith("Platform: ")), "")
    body = (
        f"// {task_line}\n"
        f"// {platform_line}\n"
        "#include <stdint.h>\n"
        "\n"
        "static volatile uint32_t ticks;\n"
        "\n"
        "int main(void) {\n"
        "    ticks = 0;\n"
        "    for (;;) {\n"
        "        ticks++;\n"
        "    }\n"
        "    return 0;\n"
        "}\n"
    )
    return f"Here is the firmware you asked for.\n\n```c\n{body}```\n\nLet me know if it behaves."


def _platform_token(prompt: str) -> str:
    line = next((l for l in prompt.splitlines() if l.startswith("Platform: ")), "")
    return re.sub(r"[^a-z0-9+]", "", line[len("Platform: ") :].lower())


def default_manager_text(request: ProviderRequest) -> str:
    """Select skills tagged for the task's platform, wrapped in prose."""
    index_msg, task_prompt = request.messages
    token = _platform_token(task_prompt)
    picks = []
    for line in index_msg.splitlines()[1:]:
        if " — " not in line:
            continue
        name = line.split(" — ")[0].strip()
        tagged = re.findall(r"\[([^\]]*)\]", line)
        platforms = {re.sub(r"[^a-z0-9+]", "", p) for group in tagged for p in group.split(",")}
        if token and token in platforms:
            picks.append(name)
    if not picks:
        return "none needed"
    return "\n".join(f"I would use: {name}" for name in picks)


class FakeModel:
    """Deterministic provider stand-in; the thing record mode wraps in tests."""

    name = "fake"

    def __init__(self, coder_text=default_coder_text, manager_text=default_manager_text):
        self.coder_text = coder_text
        self.manager_text = manager_text
        self.calls = 0
        self.requests: list[ProviderRequest] = []

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        self.requests.append(request)
        if request.system.startswith(MANAGER_SYSTEM_PROMPT[:40]):
            text = self.manager_text(request)
        else:
            text = self.coder_text(request)
        usage = TokenUsage(
            input_tokens=estimate_tokens(request.system + "".join(request.messages)),
            output_tokens=estimate_tokens(text),
        )
        return ProviderResponse(text=text, usage=usage, latency_s=0.0)


def force_failure_coder(title_fragments: set[str], marker: str = "FORCE_COMPILE_FAILURE"):
    """Coder text factory embedding a failure marker for matching task titles.

    The rendered task prompt carries the title, not the id, so matching is
    by title fragment.
    """

    def reply(request: ProviderRequest) -> str:
        text = default_coder_text(request)
        prompt = request.messages[0]
        if any(fragment in prompt for fragment in title_fragments):
            text = text.replace("ticks = 0;", f"ticks = 0; /* {marker} */")
        return text

    return reply
