"""Outcome breakdowns, pass@k and token summaries computed from journals.

The task-level @k classification is the maximum outcome over the first k
attempts under CF < BF < BC; pass@k is the BC fraction of a group, kept
as an exact rational. Token summaries are arithmetic means over complete
attempt records, split by pipeline node, also exact.

Reports render as a markdown table (rows = skills mode x platform,
columns = level breakdowns plus Total, cells "cf/bf/bc"), as CSV (one row
per group), or as a lossless nested JSON document.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyGroup, InsufficientAttempts, UnsupportedFormat
from .journal import CampaignState, InstanceKey, replay
from .outcomes import Outcome
from .platforms import PLATFORMS, PLATFORM_ORDER
from .providers import TokenUsage

MODE_ORDER = ("none", "llm-generated", "human-expert")
MODE_DISPLAY = {"none": "No-Skills", "llm-generated": "LLM", "human-expert": "Human-Expert"}
TOTAL = "total"
FORMATS = ("md", "csv", "json")


@dataclass(frozen=True)
class CompletedAttempt:
    key: InstanceKey
    attempt: int
    level: int
    outcome: Outcome
    manager_usage: TokenUsage | None = None
    coder_usage: TokenUsage | None = None


@dataclass(frozen=True)
class GroupKey:
    mode: str
    platform: str
    level: int | str  # 1 | 2 | 3 | "total"


@dataclass(frozen=True)
class CellBreakdown:
    group: GroupKey
    cf: int
    bf: int
    bc: int

    @property
    def instances(self) -> int:
        return self.cf + self.bf + self.bc

    @property
    def cell(self) -> str:
        return f"{self.cf}/{self.bf}/{self.bc}"


@dataclass(frozen=True)
class TokenSummary:
    group: GroupKey
    mean_input: Fraction
    mean_output: Fraction
    manager_input: Fraction
    manager_output: Fraction
    coder_input: Fraction
    coder_output: Fraction


@dataclass(frozen=True)
class Report:
    k: int
    cells: tuple[CellBreakdown, ...]
    tokens: tuple[TokenSummary, ...]


def collect_from_state(state: CampaignState) -> list[CompletedAttempt]:
    """Extract the complete attempts (the metric inputs) from folded state."""
    records = []
    for view in state.attempts.values():
        if not view.complete or view.outcome is None:
            continue
        usage = view.usage or {}
        records.append(
            CompletedAttempt(
                key=view.key,
                attempt=view.attempt,
                level=view.level,
                outcome=view.outcome,
                manager_usage=TokenUsage.from_dict(usage.get("manager")),
                coder_usage=TokenUsage.from_dict(usage.get("coder")),
            )
        )
    records.sort(key=lambda r: (r.key.task, r.key.mode, r.key.platform, r.attempt))
    return records


def collect(journal_path: Path) -> list[CompletedAttempt]:
    return collect_from_state(replay(journal_path))


def outcome_at_k(outcomes: Sequence[Outcome], k: int) -> Outcome:
    """Best outcome over the first k attempts; k=1 is the first attempt."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(outcomes) < k:
        raise InsufficientAttempts(f"need {k} attempts, have {len(outcomes)}")
    return max(outcomes[:k])


@dataclass(frozen=True)
class Instance:
    key: InstanceKey
    level: int
    outcomes: tuple[Outcome, ...]  # index order, attempt 1 first


def group_instances(records: Iterable[CompletedAttempt]) -> list[Instance]:
    """Fold attempt records into per-instance outcome vectors.

    The vector covers attempts 1..n contiguously; gaps surface later as
    InsufficientAttempts for any k beyond the last contiguous attempt.
    """
    by_key: dict[InstanceKey, dict[int, CompletedAttempt]] = {}
    for record in records:
        by_key.setdefault(record.key, {})[record.attempt] = record
    instances = []
    for key in sorted(by_key, key=lambda k: (k.task, k.mode, k.platform)):
        attempts = by_key[key]
        vector = []
        for index in range(1, max(attempts) + 1):
            if index not in attempts:
                break
            vector.append(attempts[index].outcome)
        level = attempts[min(attempts)].level
        instances.append(Instance(key=key, level=level, outcomes=tuple(vector)))
    return instances


def _check_k(instances: list[Instance], k: int) -> None:
    short = [i.key.slug() for i in instances if len(i.outcomes) < k]
    if short:
        raise InsufficientAttempts(
            f"{len(short)} instance(s) have fewer than {k} complete attempts: {', '.join(short[:5])}"
            + ("..." if len(short) > 5 else ""),
            instances=short,
        )


def ready_records(records: Iterable[CompletedAttempt], k: int) -> list[CompletedAttempt]:
    """Keep only attempts belonging to instances with >= k contiguous
    complete attempts; the live-campaign view, where not-yet-ready
    instances render as pending instead of failing the report."""
    records = list(records)
    ready = {i.key for i in group_instances(records) if len(i.outcomes) >= k}
    return [r for r in records if r.key in ready]


def aggregate(records: Iterable[CompletedAttempt], k: int) -> list[CellBreakdown]:
    """Count outcome_at_k per (mode, platform, level) with totals rows."""
    instances = group_instances(records)
    _check_k(instances, k)
    counts: dict[GroupKey, list[int]] = {}
    for instance in instances:
        best = outcome_at_k(instance.outcomes, k)
        for level in (instance.level, TOTAL):
            group = GroupKey(instance.key.mode, instance.key.platform, level)
            counts.setdefault(group, [0, 0, 0])[best] += 1
    cells = [
        CellBreakdown(group=group, cf=c[Outcome.CF], bf=c[Outcome.BF], bc=c[Outcome.BC])
        for group, c in counts.items()
    ]
    cells.sort(key=lambda cell: _group_sort_key(cell.group))
    return cells


def _mode_rank(mode: str) -> tuple[int, str]:
    return (MODE_ORDER.index(mode), "") if mode in MODE_ORDER else (len(MODE_ORDER), mode)


def _platform_rank(platform: str) -> tuple[int, str]:
    order = tuple(PLATFORM_ORDER)
    return (order.index(platform), "") if platform in order else (len(order), platform)


def _level_rank(level: int | str) -> tuple[int, int]:
    return (1, 0) if level == TOTAL else (0, int(level))


def _group_sort_key(group: GroupKey):
    return (_mode_rank(group.mode), _platform_rank(group.platform), _level_rank(group.level))


def pass_at_k(records: Iterable[CompletedAttempt], k: int, group: GroupKey) -> Fraction:
    """Fraction of the group's instances whose outcome_at_k is BC; exact."""
    instances = [
        i
        for i in group_instances(records)
        if i.key.mode == group.mode
        and i.key.platform == group.platform
        and (group.level == TOTAL or i.level == group.level)
    ]
    if not instances:
        raise EmptyGroup(f"no instances in group {group}")
    _check_k(instances, k)
    bc = sum(1 for i in instances if outcome_at_k(i.outcomes, k) is Outcome.BC)
    return Fraction(bc, len(instances))


def token_summary(records: Iterable[CompletedAttempt], group: GroupKey) -> TokenSummary:
    """Mean tokens per attempt for a group, split by node; exact rationals.

    Attempts without usage metadata are skipped; a group with none at all
    reports zero means.
    """
    rows = [
        r
        for r in records
        if r.key.mode == group.mode
        and r.key.platform == group.platform
        and (group.level == TOTAL or r.level == group.level)
        and r.coder_usage is not None
    ]
    if not rows:
        zero = Fraction(0)
        return TokenSummary(group, zero, zero, zero, zero, zero, zero)
    n = len(rows)

    def mean(values: Iterable[int]) -> Fraction:
        return Fraction(sum(values), n)

    manager_in = mean(r.manager_usage.input_tokens if r.manager_usage else 0 for r in rows)
    manager_out = mean(r.manager_usage.output_tokens if r.manager_usage else 0 for r in rows)
    coder_in = mean(r.coder_usage.input_tokens for r in rows)
    coder_out = mean(r.coder_usage.output_tokens for r in rows)
    return TokenSummary(
        group=group,
        mean_input=manager_in + coder_in,
        mean_output=manager_out + coder_out,
        manager_input=manager_in,
        manager_output=manager_out,
        coder_input=coder_in,
        coder_output=coder_out,
    )


def compute_report(records: list[CompletedAttempt], k: int) -> Report:
    cells = aggregate(records, k)
    tokens = tuple(token_summary(records, cell.group) for cell in cells)
    return Report(k=k, cells=tuple(cells), tokens=tokens)


# -- rendering ----------------------------------------------------------------


def _frac_str(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _parse_frac(raw: str) -> Fraction:
    return Fraction(raw)


def _levels_present(cells: Sequence[CellBreakdown]) -> list[int]:
    return sorted({cell.group.level for cell in cells if cell.group.level != TOTAL})


def _level_header(cells: Sequence[CellBreakdown], level: int | str) -> str:
    label = "Total" if level == TOTAL else f"L{level}"
    counts = {cell.instances for cell in cells if cell.group.level == level}
    if len(counts) == 1:
        return f"{label} ({counts.pop()})"
    return label


def _rows(cells: Sequence[CellBreakdown]) -> list[tuple[str, str]]:
    seen: list[tuple[str, str]] = []
    for cell in cells:
        row = (cell.group.mode, cell.group.platform)
        if row not in seen:
            seen.append(row)
    return seen


def emit_markdown(report: Report) -> str:
    cells = report.cells
    levels: list[int | str] = [*_levels_present(cells), TOTAL]
    by_group = {cell.group: cell for cell in cells}
    lines = [f"# Outcome report @k={report.k}", ""]
    if not cells:
        lines.append("| Skills | Platform |")
        lines.append("| --- | --- |")
        return "\n".join(lines) + "\n"
    headers = ["Skills", "Platform"] + [_level_header(cells, level) for level in levels]
    lines.append("| " + " | ".join(headers) + " |")
    lines.append("|" + " --- |" * len(headers))
    for mode, platform in _rows(cells):
        row = [MODE_DISPLAY.get(mode, mode), PLATFORMS[platform].display if platform in PLATFORMS else platform]
        for level in levels:
            cell = by_group.get(GroupKey(mode, platform, level))
            row.append(cell.cell if cell else "-")
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    lines.append("## Token usage (mean per attempt)")
    lines.append("")
    lines.append("| Skills | Platform | Input | Output | Manager in/out | Coder in/out |")
    lines.append("|" + " --- |" * 6)
    tokens_by_group = {t.group: t for t in report.tokens}
    for mode, platform in _rows(cells):
        t = tokens_by_group.get(GroupKey(mode, platform, TOTAL))
        if t is None:
            continue
        lines.append(
            "| "
            + " | ".join(
                [
                    MODE_DISPLAY.get(mode, mode),
                    PLATFORMS[platform].display if platform in PLATFORMS else platform,
                    _frac_str(t.mean_input),
                    _frac_str(t.mean_output),
                    f"{_frac_str(t.manager_input)}/{_frac_str(t.manager_output)}",
                    f"{_frac_str(t.coder_input)}/{_frac_str(t.coder_output)}",
                ]
            )
            + " |"
        )
    return "\n".join(lines) + "\n"


CSV_COLUMNS = (
    "mode",
    "platform",
    "level",
    "cf",
    "bf",
    "bc",
    "mean_input",
    "mean_output",
    "manager_input",
    "manager_output",
    "coder_input",
    "coder_output",
)


def emit_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    tokens_by_group = {t.group: t for t in report.tokens}
    for cell in report.cells:
        t = tokens_by_group[cell.group]
        writer.writerow(
            [
                cell.group.mode,
                cell.group.platform,
                cell.group.level,
                cell.cf,
                cell.bf,
                cell.bc,
                _frac_str(t.mean_input),
                _frac_str(t.mean_output),
                _frac_str(t.manager_input),
                _frac_str(t.manager_output),
                _frac_str(t.coder_input),
                _frac_str(t.coder_output),
            ]
        )
    return buffer.getvalue()


def emit_json(report: Report) -> str:
    modes: dict = {}
    tokens_by_group = {t.group: t for t in report.tokens}
    for cell in report.cells:
        t = tokens_by_group[cell.group]
        level_key = str(cell.group.level)
        modes.setdefault(cell.group.mode, {}).setdefault(cell.group.platform, {})[level_key] = {
            "cf": cell.cf,
            "bf": cell.bf,
            "bc": cell.bc,
            "tokens": {
                "input": _frac_str(t.mean_input),
                "output": _frac_str(t.mean_output),
                "manager": {"input": _frac_str(t.manager_input), "output": _frac_str(t.manager_output)},
                "coder": {"input": _frac_str(t.coder_input), "output": _frac_str(t.coder_output)},
            },
        }
    return json.dumps({"k": report.k, "modes": modes}, indent=2, sort_keys=True) + "\n"


def parse_report_json(text: str) -> Report:
    """Inverse of emit_json; structured output is lossless."""
    data = json.loads(text)
    cells: list[CellBreakdown] = []
    tokens: list[TokenSummary] = []
    for mode, platforms in data["modes"].items():
        for platform, levels in platforms.items():
            for level_key, payload in levels.items():
                level: int | str = TOTAL if level_key == TOTAL else int(level_key)
                group = GroupKey(mode, platform, level)
                cells.append(
                    CellBreakdown(group=group, cf=payload["cf"], bf=payload["bf"], bc=payload["bc"])
                )
                t = payload["tokens"]
                tokens.append(
                    TokenSummary(
                        group=group,
                        mean_input=_parse_frac(t["input"]),
                        mean_output=_parse_frac(t["output"]),
                        manager_input=_parse_frac(t["manager"]["input"]),
                        manager_output=_parse_frac(t["manager"]["output"]),
                        coder_input=_parse_frac(t["coder"]["input"]),
                        coder_output=_parse_frac(t["coder"]["output"]),
                    )
                )
    cells.sort(key=lambda cell: _group_sort_key(cell.group))
    tokens.sort(key=lambda t: _group_sort_key(t.group))
    return Report(k=data["k"], cells=tuple(cells), tokens=tuple(tokens))


def emit_report(report: Report, fmt: str) -> str:
    if fmt == "md":
        return emit_markdown(report)
    if fmt == "csv":
        return emit_csv(report)
    if fmt == "json":
        return emit_json(report)
    raise UnsupportedFormat(f"format must be one of {FORMATS}, got {fmt!r}")
