from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from support import FIXTURES, FakeModel  # noqa: E402

from hilbench.corpus import Corpus, load_corpus  # noqa: E402
from hilbench.providers import RecordingProvider, ReplayProvider  # noqa: E402
from hilbench.skills import SkillLibrary, load_library  # noqa: E402


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return load_corpus(FIXTURES / "corpus")


@pytest.fixture(scope="session")
def expert_library() -> SkillLibrary:
    return load_library(FIXTURES / "skills" / "human-expert")


@pytest.fixture(scope="session")
def reference_journal() -> Path:
    return FIXTURES / "reference_journal.jsonl"


@pytest.fixture()
def fake_model() -> FakeModel:
    return FakeModel()


@pytest.fixture()
def replay_pair(tmp_path):
    """(recording provider, make_replay): record against the fake, then replay."""
    cassettes = tmp_path / "cassettes"
    fake = FakeModel()
    recorder = RecordingProvider(fake, cassettes)

    def make_replay() -> ReplayProvider:
        return ReplayProvider(cassettes)

    return recorder, make_replay, fake
