"""Provider-agnostic chat-session layer.

A ChatSession owns an alternating user/assistant history on top of a client
backend: HttpChatClient speaks chat-completions JSON over HTTPS, ReplayClient
yields pre-scripted replies for deterministic offline runs.  Transcripts
round-trip: a recorded session can be re-loaded as a replay script that
reproduces the assistant replies verbatim.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import httpx

from .errors import (
    PromptMismatch,
    ProviderError,
    ScriptExhausted,
    TimeoutError,
    TransportError,
)

UNSCRIPTED = "UNSCRIPTED"
_RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}


@dataclass
class LlmConfig:
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    model_name: str = "gpt-4o"
    temperature: float = 1.0
    max_tokens: int = 4095
    timeout: float = 60.0
    max_retries: int = 3
    api_key_env: str = "MOTIONLAB_API_KEY"
    backoff_base: float = 0.5  # seconds; delay = base * 2**(attempt-1)

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def _estimate_tokens(text: str) -> int:
    # rough 4-chars-per-token heuristic, good enough for cost bookkeeping
    return max(1, (len(text) + 3) // 4)


@dataclass
class Transcript:
    model_name: str
    strategy: str = ""
    motion_id: int | None = None
    started_at: str = ""
    finished_at: str = ""
    messages: list[dict] = field(default_factory=list)
    token_counts: dict = field(default_factory=lambda: {"prompt": 0, "completion": 0})

    def to_dict(self) -> dict:
        return asdict(self)

    def assistant_replies(self) -> list[str]:
        return [m["content"] for m in self.messages if m["role"] == "assistant"]


class ChatSession:
    """Single-caller conversation; first entry is the system prompt and
    roles strictly alternate user/assistant afterwards."""

    def __init__(self, client, config: LlmConfig, system_prompt: str,
                 strategy: str = "", motion_id: int | None = None):
        self.client = client
        self.config = config
        self.history: list[tuple[str, str]] = [("system", system_prompt)]
        self.transcript = Transcript(
            model_name=config.model_name,
            strategy=strategy,
            motion_id=motion_id,
            started_at=_now_iso(),
        )
        self.transcript.messages.append({"role": "system", "content": system_prompt})

    @property
    def system_prompt(self) -> str:
        return self.history[0][1]

    def send(self, user_message: str) -> str:
        """Append the user message, obtain the assistant reply, record both."""
        messages = [{"role": r, "content": c} for r, c in self.history]
        messages.append({"role": "user", "content": user_message})
        reply, usage = self.client.complete(messages, self.config)
        self.history.append(("user", user_message))
        self.history.append(("assistant", reply))
        self.transcript.messages.append({"role": "user", "content": user_message})
        self.transcript.messages.append({"role": "assistant", "content": reply})
        counts = self.transcript.token_counts
        counts["prompt"] += usage.get("prompt_tokens", _estimate_tokens(user_message))
        counts["completion"] += usage.get("completion_tokens", _estimate_tokens(reply))
        return reply

    def exchanges(self) -> int:
        return sum(1 for role, _ in self.history if role == "assistant")

    def user_messages(self) -> list[str]:
        return [c for r, c in self.history if r == "user"]


class HttpChatClient:
    """Chat-completions JSON over HTTPS with bearer auth from the
    environment and exponential backoff on transient failures."""

    def __init__(self, sleep=time.sleep, transport: httpx.BaseTransport | None = None):
        self._sleep = sleep
        self._transport = transport

    def _api_key(self, config: LlmConfig) -> str:
        key = os.environ.get(config.api_key_env, "")
        if not key:
            raise ProviderError(
                f"API key environment variable {config.api_key_env!r} is not set")
        return key

    def complete(self, messages: list[dict], config: LlmConfig) -> tuple[str, dict]:
        payload = {
            "model": config.model_name,
            "messages": messages,
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self._api_key(config)}"}
        attempts = config.max_retries + 1
        last_exc: Exception | None = None
        timed_out = False
        for attempt in range(1, attempts + 1):
            try:
                with httpx.Client(transport=self._transport, timeout=config.timeout) as client:
                    response = client.post(config.endpoint_url, json=payload, headers=headers)
            except httpx.TimeoutException as exc:
                last_exc, timed_out = exc, True
            except httpx.TransportError as exc:
                last_exc = exc
            else:
                if response.status_code == 200:
                    body = response.json()
                    reply = body["choices"][0]["message"]["content"]
                    return reply, body.get("usage", {})
                if response.status_code in _RETRYABLE_STATUS:
                    last_exc = ProviderError(
                        f"retryable status {response.status_code}", response.status_code)
                else:
                    raise ProviderError(
                        f"provider rejected request: {response.status_code} {response.text[:200]}",
                        response.status_code,
                    )
            if attempt < attempts:
                self._sleep(config.backoff_base * 2 ** (attempt - 1))
        if timed_out:
            raise TimeoutError(f"timed out after {attempts} attempts", attempts) from last_exc
        raise TransportError(
            f"transport failed after {attempts} attempts: {last_exc}", attempts) from last_exc

    def session(self, config: LlmConfig, system_prompt: str, **tags) -> ChatSession:
        return ChatSession(self, config, system_prompt, **tags)


class ReplayClient:
    """Deterministic stand-in: replies come from a shared script, consumed in
    send order across every session created from this client.

    Script entries are either plain reply strings or dicts with a "reply" key
    plus optional "expect" / "expect_sha256" prompt fingerprints checked in
    strict mode.
    """

    def __init__(self, script: list, strict: bool = False):
        self.script = list(script)
        self.strict = strict
        self.cursor = 0

    def complete(self, messages: list[dict], config: LlmConfig) -> tuple[str, dict]:
        prompt = messages[-1]["content"]
        if self.cursor >= len(self.script):
            if self.strict:
                raise ScriptExhausted(
                    f"script exhausted after {len(self.script)} replies; prompt: {prompt[:80]!r}")
            return UNSCRIPTED, {}
        entry = self.script[self.cursor]
        self.cursor += 1
        if isinstance(entry, str):
            return entry, {}
        if self.strict:
            expected = entry.get("expect")
            if expected is not None and expected != prompt:
                raise PromptMismatch(f"prompt differs from recording at entry {self.cursor - 1}")
            digest = entry.get("expect_sha256")
            if digest is not None and hashlib.sha256(prompt.encode()).hexdigest() != digest:
                raise PromptMismatch(f"prompt fingerprint mismatch at entry {self.cursor - 1}")
        return entry["reply"], entry.get("usage", {})

    def session(self, config: LlmConfig, system_prompt: str, **tags) -> ChatSession:
        return ChatSession(self, config, system_prompt, **tags)


def make_replay_client(script: list, strict: bool = False) -> ReplayClient:
    return ReplayClient(script, strict=strict)


def _now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + "Z"


def record_transcript(session: ChatSession, directory) -> Path:
    """Persist the session transcript as one JSON document; returns the path."""
    if session.exchanges() < 1:
        raise ValueError("session has no exchanges to record")
    session.transcript.finished_at = _now_iso()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tag = session.transcript.strategy or "session"
    motion = session.transcript.motion_id
    stem = f"motion_{motion:02d}_{tag}" if motion is not None else tag
    path = directory / f"{stem}.json"
    n = 1
    while path.exists():
        path = directory / f"{stem}_{n}.json"
        n += 1
    path.write_text(json.dumps(session.transcript.to_dict(), indent=2) + "\n")
    return path


def load_transcript(path) -> Transcript:
    doc = json.loads(Path(path).read_text())
    return Transcript(**doc)


def replay_from_transcript(transcript: Transcript, strict: bool = False) -> ReplayClient:
    """Replay client that reproduces the recorded assistant replies in order."""
    return ReplayClient(transcript.assistant_replies(), strict=strict)
