#!/usr/bin/env python3
"""Regenerate golden assembler bundles and golden report documents.

Run from the repository root after intentional template or format changes:

    python3 scripts/build_goldens.py

Tests compare live output byte-for-byte against these files.
"""

from __future__ import annotations

import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from support import GOLDEN, PLATFORM_SHORT, canonical_source  # noqa: E402

from hilbench.assembler import assemble  # noqa: E402
from hilbench.corpus import load_corpus  # noqa: E402
from hilbench.metrics import collect, compute_report, emit_report  # noqa: E402
from hilbench.platforms import get_platform  # noqa: E402


def build_bundles() -> None:
    corpus = load_corpus(ROOT / "fixtures" / "corpus")
    out_root = GOLDEN / "bundles"
    if out_root.exists():
        shutil.rmtree(out_root)
    count = 0
    for task in corpus.tasks:
        bundle = assemble(get_platform(task.target), canonical_source(task), task)
        bundle_dir = out_root / f"{task.id}.{PLATFORM_SHORT[task.target]}"
        for rel, content in bundle.files:
            target = bundle_dir / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
        count += 1
    print(f"bundles: {count} -> {out_root}")


def build_reports() -> None:
    records = collect(ROOT / "fixtures" / "reference_journal.jsonl")
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for k in (1, 5):
        report = compute_report(records, k)
        path = GOLDEN / f"report_k{k}.md"
        path.write_text(emit_report(report, "md"), encoding="utf-8")
        print(f"report: {path}")


def main() -> None:
    build_bundles()
    build_reports()


if __name__ == "__main__":
    main()
