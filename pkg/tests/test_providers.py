"""Provider stack: hashing, record/replay cassettes, retry policy, config."""

from __future__ import annotations

import json

import pytest

from support import FakeModel

from hilbench.errors import ProviderError, ReplayMiss, TransientProviderError
from hilbench.providers import (
    GenerationParams,
    HttpProvider,
    ProviderConfig,
    ProviderRequest,
    ProviderResponse,
    RecordingProvider,
    ReplayProvider,
    RetryingProvider,
    TokenUsage,
    build_provider,
)


def _request(text: str = "hello") -> ProviderRequest:
    return ProviderRequest(system="system prompt", messages=(text,), model="m")


class TestTypes:
    def test_usage_addition(self):
        assert TokenUsage(1, 2) + TokenUsage(3, 4) == TokenUsage(4, 6)

    def test_usage_rejects_negative(self):
        with pytest.raises(ValueError):
            TokenUsage(-1, 0)

    def test_empty_system_rejected(self):
        with pytest.raises(ValueError):
            ProviderRequest(system="  ", messages=("x",), model="m")

    def test_digest_stable_and_distinct(self):
        a, b = _request("one"), _request("two")
        assert a.digest() == _request("one").digest()
        assert a.digest() != b.digest()


class TestRecordReplay:
    def test_round_trip(self, tmp_path):
        fake = FakeModel()
        recorder = RecordingProvider(fake, tmp_path)
        request = _request()
        recorded = recorder.complete(request)
        assert fake.calls == 1

        replayer = ReplayProvider(tmp_path)
        replayed = replayer.complete(request)
        assert replayed == recorded

    def test_recording_is_idempotent(self, tmp_path):
        fake = FakeModel()
        recorder = RecordingProvider(fake, tmp_path)
        recorder.complete(_request())
        recorder.complete(_request())
        assert fake.calls == 1

    def test_replay_miss(self, tmp_path):
        with pytest.raises(ReplayMiss):
            ReplayProvider(tmp_path).complete(_request())

    def test_cassette_file_carries_request(self, tmp_path):
        recorder = RecordingProvider(FakeModel(), tmp_path)
        request = _request()
        recorder.complete(request)
        cassette = json.loads(next(tmp_path.glob("*.json")).read_text(encoding="utf-8"))
        assert cassette["request"]["system"] == "system prompt"
        assert "text" in cassette["response"]


class _Flaky:
    name = "flaky"

    def __init__(self, failures: int):
        self.failures = failures
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransientProviderError("boom")
        return ProviderResponse(text="ok", usage=TokenUsage(1, 1))


class TestRetry:
    def test_recovers_within_budget(self):
        slept = []
        provider = RetryingProvider(_Flaky(2), sleep=slept.append)
        assert provider.complete(_request()).text == "ok"
        assert slept == [1.0, 2.0]  # exponential from 1 s

    def test_exhausted_raises_provider_error(self):
        slept = []
        provider = RetryingProvider(_Flaky(99), sleep=slept.append)
        with pytest.raises(ProviderError):
            provider.complete(_request())
        assert len(slept) == 2  # 3 attempts, 2 backoffs

    def test_non_transient_not_retried(self):
        class Fatal:
            calls = 0

            def complete(self, request):
                Fatal.calls += 1
                raise ProviderError("rejected")

        with pytest.raises(ProviderError):
            RetryingProvider(Fatal(), sleep=lambda s: None).complete(_request())
        assert Fatal.calls == 1


class TestHttpProvider:
    def test_payload_shape_and_parsing(self, monkeypatch):
        provider = HttpProvider("https://example.invalid/v1", "model-x")
        sent = {}

        def fake_post(payload):
            sent.update(payload)
            return {
                "choices": [{"message": {"content": "generated"}}],
                "usage": {"prompt_tokens": 10, "completion_tokens": 20},
            }

        monkeypatch.setattr(provider, "_post", fake_post)
        response = provider.complete(_request("user message"))
        assert response.text == "generated"
        assert response.usage == TokenUsage(10, 20)
        assert sent["messages"][0] == {"role": "system", "content": "system prompt"}
        assert sent["messages"][1] == {"role": "user", "content": "user message"}

    def test_malformed_response(self, monkeypatch):
        provider = HttpProvider("https://example.invalid/v1", "model-x")
        monkeypatch.setattr(provider, "_post", lambda payload: {"unexpected": True})
        with pytest.raises(ProviderError):
            provider.complete(_request())


class TestConfig:
    def test_replay_config(self, tmp_path):
        config_path = tmp_path / "provider.json"
        config_path.write_text(
            json.dumps({"mode": "replay", "cassette_dir": "cassettes", "model": "m"}), encoding="utf-8"
        )
        config = ProviderConfig.load(config_path)
        assert config.cassette_dir == (tmp_path / "cassettes").resolve()
        provider = build_provider(config)
        assert isinstance(provider, ReplayProvider)

    def test_http_requires_endpoint(self):
        with pytest.raises(ProviderError):
            build_provider(ProviderConfig(mode="http"))

    def test_unknown_mode(self):
        with pytest.raises(ProviderError):
            build_provider(ProviderConfig(mode="telepathy"))

    def test_params_loaded(self, tmp_path):
        config_path = tmp_path / "provider.json"
        config_path.write_text(
            json.dumps({"mode": "replay", "cassette_dir": ".", "temperature": 0.7, "max_tokens": 64}),
            encoding="utf-8",
        )
        config = ProviderConfig.load(config_path)
        assert config.params == GenerationParams(temperature=0.7, max_tokens=64)
