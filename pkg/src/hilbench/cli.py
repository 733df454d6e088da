"""Single entry point: skills, generation, campaign, serving, reporting.

Exit codes: 0 success, 1 domain error, 2 usage error. Machine-readable
data goes to stdout; every diagnostic goes to stderr, so csv/json output
can be piped without filtering.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .campaign import CampaignPlan, CampaignRuntime, load_plan, run_campaign
from .control_api import DEFAULT_PORT, serve_control_api
from .corpus import load_corpus, validate_corpus_shape, FULL_BENCHMARK_SHAPE
from .errors import HilbenchError
from .metrics import collect, compute_report, emit_report, FORMATS
from .pipeline import SkillsMode, run_pipeline
from .platforms import PLATFORMS, get_platform
from .providers import ProviderConfig, build_provider
from .skillgen import generate_skills
from .skills import render_header_index, scan_headers, validate_library
from .toolchain import load_profiles, make_stub_profile, materialize
from .verdicts import ConsoleVerdicts, ScriptedVerdicts, SerialPatternVerdicts

log = logging.getLogger("hilbench")


def _existing_path(raw: str) -> Path:
    path = Path(raw)
    if not path.exists():
        raise argparse.ArgumentTypeError(f"path does not exist: {raw}")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hilbench", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hilbench {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="increase log level")
    sub = parser.add_subparsers(dest="command", required=True)

    skills = sub.add_parser("skills", help="skill library operations")
    skills_sub = skills.add_subparsers(dest="skills_command", required=True)

    p = skills_sub.add_parser("validate", help="report library problems")
    p.add_argument("--dir", type=_existing_path, required=True, help="skill library directory")

    p = skills_sub.add_parser("list", help="print the header index")
    p.add_argument("--dir", type=_existing_path, required=True)

    p = skills_sub.add_parser("generate", help="generate skills from tasks via the provider")
    p.add_argument("--corpus", type=_existing_path, required=True)
    p.add_argument("--level", type=int, action="append", help="restrict to level(s)")
    p.add_argument("--provider", type=_existing_path, required=True, help="provider config file")
    p.add_argument("--out", type=Path, required=True, help="output skill directory")

    p = sub.add_parser("gen", help="run the pipeline once and write the bundle")
    p.add_argument("--task", required=True)
    p.add_argument("--platform", required=True, choices=sorted(PLATFORMS))
    p.add_argument("--skills", required=True, choices=("none", "llm-generated", "human-expert"))
    p.add_argument("--skills-dir", type=_existing_path, help="library for non-none modes")
    p.add_argument("--corpus", type=_existing_path, required=True)
    p.add_argument("--provider", type=_existing_path, required=True)
    p.add_argument("--out", type=Path, required=True)

    campaign = sub.add_parser("campaign", help="run or resume a campaign")
    campaign_sub = campaign.add_subparsers(dest="campaign_command", required=True)
    for name in ("run", "resume"):
        p = campaign_sub.add_parser(name)
        p.add_argument("--plan", type=_existing_path, required=True, help="plan file (json)")
        p.add_argument(
            "--verdicts",
            default="interactive",
            help="verdict source: interactive | serial | scripted:<file.json>",
        )
        p.add_argument("--stub-toolchains", action="store_true", help="use stub compile/flash scripts")
        p.add_argument("--serve", action="store_true", help="also serve the control API while running")
        p.add_argument("--port", type=int, default=DEFAULT_PORT)

    p = sub.add_parser("serve", help="serve the control API over an existing journal")
    p.add_argument("--journal", type=_existing_path, required=True)
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", type=_existing_path, help="static dashboard directory")

    p = sub.add_parser("report", help="compute outcome/token report from a journal")
    p.add_argument("--journal", type=_existing_path, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--format", choices=FORMATS, default="md")

    p = sub.add_parser("corpus", help="corpus operations")
    corpus_sub = p.add_subparsers(dest="corpus_command", required=True)
    p = corpus_sub.add_parser("check", help="validate a corpus and its level shape")
    p.add_argument("--dir", type=_existing_path, required=True)
    p.add_argument("--full-shape", action="store_true", help="expect the full 12/16/14 benchmark shape")

    return parser


# -- command implementations ----------------------------------------------------


def _cmd_skills_validate(args) -> int:
    diagnostics = validate_library(args.dir)
    for diag in diagnostics:
        print(str(diag))
    print(f"{len(diagnostics)} problem(s) found", file=sys.stderr)
    return 1 if diagnostics else 0


def _cmd_skills_list(args) -> int:
    result = scan_headers(args.dir)
    for diag in result.diagnostics:
        print(str(diag), file=sys.stderr)
    index = render_header_index(result.headers)
    if index:
        print(index)
    return 0


def _cmd_skills_generate(args) -> int:
    corpus = load_corpus(args.corpus)
    tasks = [t for t in corpus.tasks if not args.level or t.level in args.level]
    if not tasks:
        raise HilbenchError("no tasks selected for generation")
    provider = build_provider(ProviderConfig.load(args.provider))
    result = generate_skills(tasks, provider, args.out)
    for path in result.written:
        print(path)
    print(
        f"generated {len(result.written)} skill(s); usage "
        f"{result.usage.input_tokens} in / {result.usage.output_tokens} out",
        file=sys.stderr,
    )
    return 0


def _cmd_gen(args) -> int:
    corpus = load_corpus(args.corpus)
    task = corpus.variant(args.task, args.platform)
    profile = get_platform(args.platform)
    mode = SkillsMode(kind=args.skills, library_dir=args.skills_dir)
    config = ProviderConfig.load(args.provider)
    provider = build_provider(config)
    record, bundle = run_pipeline(task, profile, mode, provider, model=config.model, params=config.params)
    out = Path(args.out)
    materialize(bundle, out / "project")
    (out / "run_record.json").write_text(
        json.dumps(record.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(out / "project")
    print(
        f"tokens: {record.total_usage.input_tokens} in / {record.total_usage.output_tokens} out",
        file=sys.stderr,
    )
    return 0


def _verdict_source(args, plan: CampaignPlan, toolchains):
    spec = args.verdicts
    if spec == "interactive":
        return ConsoleVerdicts()
    if spec == "serial":
        return SerialPatternVerdicts(toolchains, capture_s=plan.serial_capture_s)
    if spec.startswith("scripted:"):
        path = Path(spec.split(":", 1)[1])
        entries = json.loads(path.read_text(encoding="utf-8"))
        return ScriptedVerdicts(entries.get("entries", entries), default=entries.get("default"))
    raise HilbenchError(f"unknown verdict source {spec!r}")


def _cmd_campaign(args) -> int:
    plan = load_plan(args.plan)
    if args.campaign_command == "resume" and not Path(plan.journal_path).exists():
        raise HilbenchError(f"cannot resume: journal {plan.journal_path} does not exist")
    if plan.provider_config is None:
        raise HilbenchError("plan must reference a provider config")
    provider = build_provider(ProviderConfig.load(plan.provider_config))
    if args.stub_toolchains:
        stub_dir = Path(str(plan.journal_path) + ".stubs")
        toolchains = {p: make_stub_profile(p, stub_dir) for p in plan.platforms}
    else:
        if plan.toolchains_path is None:
            raise HilbenchError("plan must reference toolchain profiles (or pass --stub-toolchains)")
        toolchains = load_profiles(plan.toolchains_path)
    runtime = CampaignRuntime(plan.journal_path)
    server = None
    if args.serve:
        server = serve_control_api(runtime, port=args.port)
        print(f"control API on port {server.port}", file=sys.stderr)
    try:
        source = _verdict_source(args, plan, toolchains)
        summary = run_campaign(plan, provider, toolchains, source, runtime=runtime)
    finally:
        if server is not None:
            server.close()
    print(json.dumps(summary.as_dict(), indent=2, sort_keys=True))
    incomplete = summary.state_counts.get("incomplete", 0)
    print(
        f"campaign finished: {summary.executed} executed, {summary.resumed} resumed, "
        f"{incomplete} incomplete",
        file=sys.stderr,
    )
    return 0 if incomplete == 0 else 1


def _cmd_serve(args) -> int:
    runtime = CampaignRuntime(args.journal)
    server = serve_control_api(runtime, port=args.port, host=args.host, static_dir=args.static)
    print(f"serving journal {args.journal} on http://{args.host}:{server.port}", file=sys.stderr)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        print("shutting down", file=sys.stderr)
        return 0
    finally:
        server.close()


def _cmd_report(args) -> int:
    records = collect(args.journal)
    report = compute_report(records, args.k)
    sys.stdout.write(emit_report(report, args.format))
    return 0


def _cmd_corpus_check(args) -> int:
    corpus = load_corpus(args.dir)
    counts: dict[int, int] = {}
    for level in corpus.levels().values():
        counts[level] = counts.get(level, 0) + 1
    expected = FULL_BENCHMARK_SHAPE if args.full_shape else counts
    mismatches = validate_corpus_shape(corpus, expected)
    for mismatch in mismatches:
        print(str(mismatch))
    print(
        f"{len(corpus.task_ids)} task(s), {len(corpus.tasks)} variant(s), levels {counts}",
        file=sys.stderr,
    )
    return 1 if mismatches else 0


def command_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - min(args.verbose, 2) * 10
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "skills":
            if args.skills_command == "validate":
                return _cmd_skills_validate(args)
            if args.skills_command == "list":
                return _cmd_skills_list(args)
            return _cmd_skills_generate(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "campaign":
            return _cmd_campaign(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "corpus":
            return _cmd_corpus_check(args)
        parser.error(f"unknown command {args.command!r}")
    except HilbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(command_dispatch())


if __name__ == "__main__":
    main()
