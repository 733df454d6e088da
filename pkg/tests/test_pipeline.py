"""Pipeline nodes: selection parsing, prompts, call counts, determinism."""

from __future__ import annotations

import pytest

from support import FIXTURES, FakeModel

from hilbench.pipeline import (
    CODER_SYSTEM_PROMPT,
    SkillsMode,
    coder_system_prompt,
    parse_selection,
    run_coder,
    run_manager,
    run_pipeline,
)
from hilbench.platforms import get_platform
from hilbench.providers import RecordingProvider, ReplayProvider
from hilbench.skills import load_library, render_header_index


@pytest.fixture()
def two_skill_library(tmp_path):
    (tmp_path / "zephyr-gpio.md").write_text(
        "---\nname: zephyr-gpio\ndescription: gpio rules\n---\ngpio body text", encoding="utf-8"
    )
    (tmp_path / "zephyr-buttons.md").write_text(
        "---\nname: zephyr-buttons\ndescription: button rules\n---\nbutton body text", encoding="utf-8"
    )
    return load_library(tmp_path)


class TestSelectionParsing:
    def test_plain_names(self, two_skill_library):
        selected, unmatched = parse_selection("zephyr-gpio\nzephyr-buttons", two_skill_library)
        assert selected == ["zephyr-gpio", "zephyr-buttons"]
        assert unmatched == []

    def test_prose_with_colon(self, two_skill_library):
        selected, unmatched = parse_selection("I would use: Zephyr GPIO", two_skill_library)
        assert selected == ["zephyr-gpio"]
        assert unmatched == []

    def test_bullets(self, two_skill_library):
        selected, _ = parse_selection("- Zephyr Buttons\n* zephyr gpio", two_skill_library)
        assert selected == ["zephyr-buttons", "zephyr-gpio"]

    def test_unmatched_prose_dropped(self, two_skill_library):
        selected, unmatched = parse_selection("none needed", two_skill_library)
        assert selected == []
        assert unmatched == ["none needed"]

    def test_duplicates_collapsed(self, two_skill_library):
        selected, _ = parse_selection("zephyr-gpio\nzephyr-gpio", two_skill_library)
        assert selected == ["zephyr-gpio"]


class TestManager:
    def test_selection_from_replay(self, fixture_corpus, two_skill_library):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        profile = get_platform("nrf52840+zephyr")
        index = render_header_index(two_skill_library.headers)
        fake = FakeModel(manager_text=lambda req: "zephyr-gpio\nzephyr-buttons")
        trace = run_manager(task, profile, index, two_skill_library, fake)
        assert trace.selected == ("zephyr-gpio", "zephyr-buttons")
        assert trace.usage.input_tokens > 0

    def test_empty_selection_allowed(self, fixture_corpus, two_skill_library):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        profile = get_platform("nrf52840+zephyr")
        index = render_header_index(two_skill_library.headers)
        fake = FakeModel(manager_text=lambda req: "none needed")
        trace = run_manager(task, profile, index, two_skill_library, fake)
        assert trace.selected == ()

    def test_requires_index(self, fixture_corpus, two_skill_library, fake_model):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        with pytest.raises(ValueError):
            run_manager(task, get_platform("nrf52840+zephyr"), "  ", two_skill_library, fake_model)


class TestCoder:
    def test_no_skills_prompt_is_bare_persona(self):
        assert coder_system_prompt([]) == CODER_SYSTEM_PROMPT

    def test_skill_bodies_in_selection_order(self, two_skill_library):
        skills = [two_skill_library.get("zephyr-buttons"), two_skill_library.get("zephyr-gpio")]
        system = coder_system_prompt(skills)
        assert system.index("button body text") < system.index("gpio body text")

    def test_echoed_code_block_round_trips(self, fixture_corpus, fake_model):
        task = fixture_corpus.variant("sos-morse", "atmega2560+arduino")
        trace = run_coder(task, get_platform("atmega2560+arduino"), [], fake_model)
        assert "```c" in trace.response
        assert trace.usage.output_tokens > 0


class TestRunPipeline:
    def test_none_mode_single_call_no_manager(self, fixture_corpus, fake_model):
        task = fixture_corpus.variant("sos-morse", "atmega2560+arduino")
        record, bundle = run_pipeline(
            task, get_platform("atmega2560+arduino"), SkillsMode("none"), fake_model
        )
        assert record.manager is None
        assert fake_model.calls == 1
        assert bundle.file_map[f"{task.id}/{task.id}.ino"]

    def test_skills_mode_two_calls(self, fixture_corpus, fake_model):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        mode = SkillsMode("human-expert", FIXTURES / "skills" / "human-expert")
        record, bundle = run_pipeline(task, get_platform("nrf52840+zephyr"), mode, fake_model)
        assert record.manager is not None
        assert fake_model.calls == 2
        assert record.manager.selected == ("zephyr-gpio",)  # fake picks the first indexed skill

    def test_selected_bodies_reach_coder(self, fixture_corpus, fake_model):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        mode = SkillsMode("human-expert", FIXTURES / "skills" / "human-expert")
        record, _ = run_pipeline(task, get_platform("nrf52840+zephyr"), mode, fake_model)
        library = load_library(FIXTURES / "skills" / "human-expert")
        assert library.get("zephyr-gpio").body.strip() in record.coder.system

    def test_no_skills_coder_prompt_has_no_library_text(self, fixture_corpus, fake_model):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        record, _ = run_pipeline(task, get_platform("nrf52840+zephyr"), SkillsMode("none"), fake_model)
        library = load_library(FIXTURES / "skills" / "human-expert")
        joined = record.coder.system + "".join(record.coder.messages)
        for skill in library.skills:
            assert skill.body not in joined

    def test_usage_additivity(self, fixture_corpus, fake_model):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        mode = SkillsMode("human-expert", FIXTURES / "skills" / "human-expert")
        record, _ = run_pipeline(task, get_platform("nrf52840+zephyr"), mode, fake_model)
        total = record.total_usage
        assert total.input_tokens == record.manager.usage.input_tokens + record.coder.usage.input_tokens
        assert total.output_tokens == record.manager.usage.output_tokens + record.coder.usage.output_tokens

    def test_replay_is_bit_reproducible(self, fixture_corpus, tmp_path):
        task = fixture_corpus.variant("sos-morse", "atmega2560+arduino")
        profile = get_platform("atmega2560+arduino")
        recorder = RecordingProvider(FakeModel(), tmp_path / "cassettes")
        clock = lambda: 1000.0  # noqa: E731
        args = dict(model="default", run_id="fixed", clock=clock)
        first = run_pipeline(task, profile, SkillsMode("none"), recorder, **args)
        replayed = [
            run_pipeline(task, profile, SkillsMode("none"), ReplayProvider(tmp_path / "cassettes"), **args)
            for _ in range(2)
        ]
        for record, bundle in replayed:
            assert bundle == first[1]
            assert record.coder == first[0].coder
            assert (record.run_id, record.started_at, record.finished_at) == (
                first[0].run_id,
                first[0].started_at,
                first[0].finished_at,
            )

    def test_mode_requires_library_dir(self):
        with pytest.raises(ValueError):
            SkillsMode("human-expert")
