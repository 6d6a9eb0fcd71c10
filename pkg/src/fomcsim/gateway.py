"""The one boundary to language-model completion.

Two backends share the ``complete(request) -> ChatResponse`` protocol:

* :class:`ScriptedBackend` replays canned responses from a fixture file and
  is fully deterministic; tests and replays use it.
* :class:`LiveBackend` posts to a chat-completions style HTTP endpoint,
  with bounded concurrency and retry on transport errors, 429 and 5xx.

Nothing else in the package performs network I/O.
"""
from __future__ import annotations

import json
import logging
import math
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import httpx

from .core import FomcSimError, InvalidInputError

logger = logging.getLogger(__name__)

STAGES = ("analyst", "economist", "member_analysis", "exchange", "member_vote", "statement", "reflection")
DEFAULT_MAX_OUTPUT_TOKENS = 1024
DEFAULT_API_BASE = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4o"
WILDCARD = "*"


class GatewayError(FomcSimError):
    """A completion call failed. Carries the call tag and HTTP status if any."""

    def __init__(self, message: str, tag: "CallTag | None" = None, status: int | None = None,
                 attempts: int = 1):
        super().__init__(message)
        self.tag = tag
        self.status = status
        self.attempts = attempts

    def __str__(self) -> str:
        base = super().__str__()
        extra = []
        if self.tag is not None:
            extra.append(f"tag={self.tag}")
        if self.attempts > 1:
            extra.append(f"attempts={self.attempts}")
        return f"{base} ({', '.join(extra)})" if extra else base

    @property
    def retryable(self) -> bool:
        return self.status is None or self.status == 429 or self.status >= 500


class FixtureMissError(GatewayError):
    pass


@dataclass(frozen=True)
class CallTag:
    meeting_id: str
    stage: str
    agent_id: str
    run_index: int

    def __post_init__(self):
        if self.stage not in STAGES:
            raise InvalidInputError(f"unknown stage {self.stage!r}")

    def __str__(self) -> str:
        return f"{self.meeting_id}/{self.stage}/{self.agent_id}/run{self.run_index}"


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    messages: tuple[tuple[str, str], ...]
    tag: CallTag
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    temperature: float = 0.7
    seed: int | None = None

    def __post_init__(self):
        msgs = tuple((role, text) for role, text in self.messages)
        for role, _ in msgs:
            if role not in ("user", "assistant"):
                raise InvalidInputError(f"unsupported message role {role!r}")
        if self.max_output_tokens <= 0:
            raise InvalidInputError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise InvalidInputError("temperature must be >= 0")
        object.__setattr__(self, "messages", msgs)

    @property
    def prompt_text(self) -> str:
        """System prompt and all messages, as one string (for scanning and token estimates)."""
        return "\n\n".join([self.system_prompt, *(text for _, text in self.messages)])


@dataclass(frozen=True)
class ChatResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    attempts: int = 1

    def __post_init__(self):
        if self.text is None:
            raise InvalidInputError("response text must not be None")
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise InvalidInputError("token counts must be non-negative")

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class Backend(Protocol):
    def complete(self, req: ChatRequest) -> ChatResponse: ...


def approx_tokens(text: str) -> int:
    """Rough token count: one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_delay: float = 0.5
    sleep: Callable[[float], None] = field(default=time.sleep, compare=False, repr=False)

    def delay(self, attempt: int) -> float:
        return self.base_delay * (2 ** (attempt - 1))


def with_retry(call: Callable[[], ChatResponse], policy: RetryPolicy | None = None) -> ChatResponse:
    """Run ``call`` until it succeeds, retrying transport errors, 429 and 5xx.

    The returned response records how many attempts it took; on exhaustion
    the last error is raised with ``attempts`` set.
    """
    policy = policy or RetryPolicy()
    for attempt in range(1, policy.max_attempts + 1):
        try:
            resp = call()
        except GatewayError as exc:
            exc.attempts = attempt
            if not exc.retryable or attempt == policy.max_attempts:
                raise
            logger.warning("attempt %d/%d failed: %s", attempt, policy.max_attempts, exc)
            policy.sleep(policy.delay(attempt))
            continue
        return ChatResponse(resp.text, resp.prompt_tokens, resp.completion_tokens, attempts=attempt)
    raise AssertionError("unreachable")


class ScriptedBackend:
    """Deterministic replay of fixture responses.

    Each fixture entry names ``(meeting_id, stage, agent_id)`` exactly and a
    ``run_index`` that is either an integer or ``"*"``. A call uses the entry
    with its exact run index if present, otherwise the wildcard entry. Every
    distinct call tag has its own cursor into the entry's response list, so
    repeated calls with the same tag get successive responses and runs never
    race for responses under concurrency.
    """

    def __init__(self, entries: Iterable[Mapping]):
        self._exact: dict[tuple[str, str, str, int], tuple[str, ...]] = {}
        self._wild: dict[tuple[str, str, str], tuple[str, ...]] = {}
        for i, entry in enumerate(entries):
            try:
                key = (str(entry["meeting_id"]), str(entry["stage"]), str(entry["agent_id"]))
                run = entry.get("run_index", WILDCARD)
                responses = tuple(str(r) for r in entry["responses"])
            except (KeyError, TypeError) as exc:
                raise InvalidInputError(f"fixture entry {i}: {exc}") from None
            if key[1] not in STAGES:
                raise InvalidInputError(f"fixture entry {i}: unknown stage {key[1]!r}")
            target = self._wild if run == WILDCARD else self._exact
            full_key = key if run == WILDCARD else (*key, int(run))
            if full_key in target:
                raise InvalidInputError(f"fixture entry {i}: duplicate pattern {full_key}")
            target[full_key] = responses
        self._cursors: dict[CallTag, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        try:
            entries = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(entries, list):
            raise InvalidInputError(f"{path}: fixture must be a JSON array")
        return cls(entries)

    def _responses(self, tag: CallTag) -> tuple[str, ...] | None:
        key = (tag.meeting_id, tag.stage, tag.agent_id)
        exact = self._exact.get((*key, tag.run_index))
        return exact if exact is not None else self._wild.get(key)

    def complete(self, req: ChatRequest) -> ChatResponse:
        tag = req.tag
        responses = self._responses(tag)
        if responses is None:
            raise FixtureMissError("no fixture entry for call", tag=tag)
        with self._lock:
            cursor = self._cursors.get(tag, 0)
            if cursor >= len(responses):
                raise FixtureMissError(f"fixture responses exhausted after {cursor}", tag=tag)
            self._cursors[tag] = cursor + 1
        text = responses[cursor]
        return ChatResponse(text, approx_tokens(req.prompt_text), approx_tokens(text))


class FairLimiter:
    """Counting semaphore that admits waiters in arrival order."""

    def __init__(self, limit: int):
        if limit < 1:
            raise InvalidInputError("concurrency limit must be >= 1")
        self.limit = limit
        self._active = 0
        self._queue: deque[object] = deque()
        self._cond = threading.Condition()

    def __enter__(self):
        ticket = object()
        with self._cond:
            self._queue.append(ticket)
            while self._queue[0] is not ticket or self._active >= self.limit:
                self._cond.wait()
            self._queue.popleft()
            self._active += 1
            self._cond.notify_all()
        return self

    def __exit__(self, *exc):
        with self._cond:
            self._active -= 1
            self._cond.notify_all()


class LiveBackend:
    """Chat-completions HTTP adapter.

    Credentials and endpoint come from ``FEDSIGHT_API_KEY``,
    ``FEDSIGHT_API_BASE`` and ``FEDSIGHT_MODEL`` unless passed explicitly.
    """

    def __init__(self, api_key: str | None = None, base_url: str | None = None, model: str | None = None,
                 concurrency_limit: int = 4, timeout: float = 60.0, retry: RetryPolicy | None = None,
                 client: httpx.Client | None = None):
        self.api_key = api_key if api_key is not None else os.environ.get("FEDSIGHT_API_KEY", "")
        self.base_url = (base_url or os.environ.get("FEDSIGHT_API_BASE") or DEFAULT_API_BASE).rstrip("/")
        self.model = model or os.environ.get("FEDSIGHT_MODEL") or DEFAULT_MODEL
        self.retry = retry or RetryPolicy()
        self._limiter = FairLimiter(concurrency_limit)
        self._client = client or httpx.Client(timeout=timeout)

    def payload(self, req: ChatRequest) -> dict:
        messages = [{"role": "system", "content": req.system_prompt}]
        messages += [{"role": role, "content": text} for role, text in req.messages]
        body = {
            "model": self.model,
            "messages": messages,
            "max_tokens": req.max_output_tokens,
            "temperature": req.temperature,
        }
        if req.seed is not None:
            body["seed"] = req.seed
        return body

    def _post(self, req: ChatRequest) -> ChatResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            with self._limiter:
                resp = self._client.post(f"{self.base_url}/chat/completions", json=self.payload(req),
                                         headers=headers)
        except httpx.TransportError as exc:
            raise GatewayError(f"transport error: {exc}", tag=req.tag) from exc
        if resp.status_code >= 400:
            raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}", tag=req.tag,
                               status=resp.status_code)
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed provider response: {exc}", tag=req.tag,
                               status=resp.status_code) from None
        usage = data.get("usage") or {}
        prompt_tokens = usage.get("prompt_tokens")
        completion_tokens = usage.get("completion_tokens")
        return ChatResponse(
            text,
            int(prompt_tokens) if prompt_tokens is not None else approx_tokens(req.prompt_text),
            int(completion_tokens) if completion_tokens is not None else approx_tokens(text),
        )

    def complete(self, req: ChatRequest) -> ChatResponse:
        return with_retry(lambda: self._post(req), self.retry)

    def close(self) -> None:
        self._client.close()


class RecordingBackend:
    """Wraps a backend and keeps every request/response pair, thread-safely."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.calls: list[tuple[ChatRequest, ChatResponse | None]] = []
        self._lock = threading.Lock()

    def complete(self, req: ChatRequest) -> ChatResponse:
        try:
            resp = self.inner.complete(req)
        except GatewayError:
            with self._lock:
                self.calls.append((req, None))
            raise
        with self._lock:
            self.calls.append((req, resp))
        return resp

    def tokens_for_run(self, meeting_id: str, run_index: int, stages: Sequence[str] = STAGES) -> int:
        return sum(
            resp.total_tokens for req, resp in self.calls
            if resp is not None and req.tag.meeting_id == meeting_id
            and req.tag.run_index == run_index and req.tag.stage in stages
        )


def complete(req: ChatRequest, backend: Backend) -> ChatResponse:
    return backend.complete(req)
