"""Model provider abstraction: one chat-completion contract, three modes.

Live mode posts an OpenAI-style chat request to a configured endpoint.
Record mode wraps another provider and persists request/response pairs as
cassette files named by request hash; replay mode serves those cassettes
and fails loudly on a miss. Replay makes every pipeline test hermetic.

Infrastructure failures are retried (3 attempts, exponential backoff from
1 s) and are never classified as firmware outcomes; callers mark the
attempt incomplete and resumable instead.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from .errors import ProviderError, ReplayMiss, TransientProviderError


@dataclass(frozen=True)
class TokenUsage:
    input_tokens: int = 0
    output_tokens: int = 0

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(self.input_tokens + other.input_tokens, self.output_tokens + other.output_tokens)

    def as_dict(self) -> dict:
        return {"input": self.input_tokens, "output": self.output_tokens}

    @classmethod
    def from_dict(cls, data: dict | None) -> "TokenUsage | None":
        if data is None:
            return None
        return cls(int(data["input"]), int(data["output"]))


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.2
    max_tokens: int = 8192

    def as_dict(self) -> dict:
        return {"temperature": self.temperature, "max_tokens": self.max_tokens}


@dataclass(frozen=True)
class ProviderRequest:
    system: str
    messages: tuple[str, ...]
    model: str
    params: GenerationParams = GenerationParams()

    def __post_init__(self) -> None:
        if not self.system.strip():
            raise ValueError("system prompt must be non-empty")

    def canonical(self) -> str:
        payload = {
            "system": self.system,
            "messages": list(self.messages),
            "model": self.model,
            "temperature": self.params.temperature,
            "max_tokens": self.params.max_tokens,
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    usage: TokenUsage
    latency_s: float = 0.0


class Provider(Protocol):
    name: str

    def complete(self, request: ProviderRequest) -> ProviderResponse: ...


class HttpProvider:
    """Chat-completions client. Endpoint, model and credential env var come
    from the provider configuration file."""

    name = "http"

    def __init__(
        self,
        endpoint: str,
        model: str,
        credential_env: str = "HILBENCH_API_KEY",
        timeout_s: float = 120.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.credential_env = credential_env
        self.timeout_s = timeout_s

    def _post(self, payload: dict) -> dict:
        import requests

        key = os.environ.get(self.credential_env, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = requests.post(
                f"{self.endpoint}/chat/completions", json=payload, headers=headers, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise TransientProviderError(f"request failed: {exc}") from exc
        if resp.status_code >= 500:
            raise TransientProviderError(f"provider returned {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderError(f"provider rejected request: {resp.status_code} {resp.text[:200]}")
        return resp.json()

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        payload = {
            "model": request.model or self.model,
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_tokens,
            "messages": [
                {"role": "system", "content": request.system},
                *({"role": "user", "content": m} for m in request.messages),
            ],
        }
        started = time.monotonic()
        data = self._post(payload)
        try:
            text = data["choices"][0]["message"]["content"]
            usage = TokenUsage(
                input_tokens=int(data["usage"]["prompt_tokens"]),
                output_tokens=int(data["usage"]["completion_tokens"]),
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        return ProviderResponse(text=text, usage=usage, latency_s=time.monotonic() - started)


def _cassette_path(cassette_dir: Path, request: ProviderRequest) -> Path:
    return Path(cassette_dir) / f"{request.digest()}.json"


def _write_cassette(path: Path, request: ProviderRequest, response: ProviderResponse) -> None:
    record = {
        "request": json.loads(request.canonical()),
        "response": {
            "text": response.text,
            "usage": response.usage.as_dict(),
            "latency_s": response.latency_s,
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _read_cassette(path: Path) -> ProviderResponse:
    record = json.loads(path.read_text(encoding="utf-8"))
    resp = record["response"]
    return ProviderResponse(
        text=resp["text"],
        usage=TokenUsage(int(resp["usage"]["input"]), int(resp["usage"]["output"])),
        latency_s=float(resp.get("latency_s", 0.0)),
    )


class RecordingProvider:
    """Pass-through provider that persists every exchange as a cassette.

    Existing cassettes are served without re-calling the inner provider,
    so recording runs are idempotent.
    """

    name = "record"

    def __init__(self, inner: Provider, cassette_dir: Path):
        self.inner = inner
        self.cassette_dir = Path(cassette_dir)
        self.calls = 0

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        path = _cassette_path(self.cassette_dir, request)
        if path.exists():
            return _read_cassette(path)
        response = self.inner.complete(request)
        _write_cassette(path, request, response)
        return response


class ReplayProvider:
    """Serves recorded cassettes by request hash; hermetic by construction."""

    name = "replay"

    def __init__(self, cassette_dir: Path):
        self.cassette_dir = Path(cassette_dir)
        self.calls = 0

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        path = _cassette_path(self.cassette_dir, request)
        if not path.exists():
            raise ReplayMiss(f"no cassette {path.name} for request (model={request.model})")
        return _read_cassette(path)


class RetryingProvider:
    """Retries transient failures: 3 attempts, exponential backoff from 1 s."""

    name = "retry"

    def __init__(
        self,
        inner: Provider,
        attempts: int = 3,
        base_delay_s: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.inner = inner
        self.attempts = attempts
        self.base_delay_s = base_delay_s
        self._sleep = sleep

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        delay = self.base_delay_s
        last: TransientProviderError | None = None
        for attempt in range(self.attempts):
            try:
                return self.inner.complete(request)
            except TransientProviderError as exc:
                last = exc
                if attempt + 1 < self.attempts:
                    self._sleep(delay)
                    delay *= 2
        raise ProviderError(f"provider failed after {self.attempts} attempts: {last}") from last


@dataclass
class ProviderConfig:
    mode: str
    model: str = "default"
    endpoint: str = ""
    cassette_dir: Path | None = None
    credential_env: str = "HILBENCH_API_KEY"
    params: GenerationParams = field(default_factory=GenerationParams)

    @classmethod
    def load(cls, path: Path) -> "ProviderConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        params = GenerationParams(
            temperature=float(data.get("temperature", 0.2)),
            max_tokens=int(data.get("max_tokens", 8192)),
        )
        cassette_dir = data.get("cassette_dir")
        if cassette_dir is not None:
            cassette_dir = (Path(path).parent / cassette_dir).resolve()
        return cls(
            mode=data["mode"],
            model=data.get("model", "default"),
            endpoint=data.get("endpoint", ""),
            cassette_dir=cassette_dir,
            credential_env=data.get("credential_env", "HILBENCH_API_KEY"),
            params=params,
        )


def build_provider(config: ProviderConfig, sleep: Callable[[float], None] = time.sleep) -> Provider:
    """Construct the provider stack described by a configuration."""
    if config.mode == "http":
        if not config.endpoint:
            raise ProviderError("http provider requires an endpoint")
        return RetryingProvider(
            HttpProvider(config.endpoint, config.model, config.credential_env), sleep=sleep
        )
    if config.mode == "replay":
        if config.cassette_dir is None:
            raise ProviderError("replay provider requires cassette_dir")
        return ReplayProvider(config.cassette_dir)
    if config.mode == "record":
        if config.cassette_dir is None or not config.endpoint:
            raise ProviderError("record provider requires endpoint and cassette_dir")
        inner = RetryingProvider(
            HttpProvider(config.endpoint, config.model, config.credential_env), sleep=sleep
        )
        return RecordingProvider(inner, config.cassette_dir)
    raise ProviderError(f"unknown provider mode {config.mode!r}")
