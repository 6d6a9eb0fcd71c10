import json
import threading
import time

import httpx
import pytest

from fomcsim.core import InvalidInputError
from fomcsim.gateway import (CallTag, ChatRequest, FairLimiter, FixtureMissError, GatewayError, LiveBackend,
                             RecordingBackend, RetryPolicy, ScriptedBackend, approx_tokens)


def req(stage="analyst", agent="analyst", run=0, meeting="2023-02-01", text="hello"):
    return ChatRequest("sys", (("user", text),), CallTag(meeting, stage, agent, run))


def test_scripted_cursor_and_exhaustion():
    b = ScriptedBackend([{"meeting_id": "2023-02-01", "stage": "analyst", "agent_id": "analyst",
                          "run_index": "*", "responses": ["one", "two"]}])
    assert b.complete(req()).text == "one"
    assert b.complete(req()).text == "two"
    with pytest.raises(FixtureMissError, match="exhausted"):
        b.complete(req())
    # another run has its own cursor
    assert b.complete(req(run=3)).text == "one"


def test_scripted_exact_beats_wildcard_and_miss():
    b = ScriptedBackend([
        {"meeting_id": "m", "stage": "analyst", "agent_id": "analyst", "run_index": "*", "responses": ["wild"]},
        {"meeting_id": "m", "stage": "analyst", "agent_id": "analyst", "run_index": 2, "responses": ["exact"]},
    ])
    assert b.complete(req(meeting="m", run=2)).text == "exact"
    assert b.complete(req(meeting="m", run=1)).text == "wild"
    with pytest.raises(FixtureMissError):
        b.complete(req(meeting="other"))


def test_scripted_token_estimate():
    b = ScriptedBackend([{"meeting_id": "m", "stage": "analyst", "agent_id": "analyst", "responses": ["abcde"]}])
    r = b.complete(req(meeting="m", text="x" * 9))
    assert r.completion_tokens == 2
    assert r.prompt_tokens == approx_tokens("sys\n\n" + "x" * 9) == 4


def test_scripted_rejects_duplicates_and_bad_files(tmp_path):
    entry = {"meeting_id": "m", "stage": "analyst", "agent_id": "a", "run_index": 1, "responses": []}
    with pytest.raises(InvalidInputError, match="duplicate"):
        ScriptedBackend([entry, entry])
    p = tmp_path / "f.json"
    p.write_text("[{]")
    with pytest.raises(InvalidInputError, match=r"f.json:1:"):
        ScriptedBackend.from_file(p)


def test_call_tag_stage_checked():
    with pytest.raises(InvalidInputError):
        CallTag("m", "gossip", "a", 0)


def test_retry_policy_backoff():
    sleeps = []
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(429 if calls["n"] == 1 else 503, text="busy")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}],
                                         "usage": {"prompt_tokens": 11, "completion_tokens": 3}})

    b = LiveBackend(api_key="k", base_url="http://x/v1", model="m", retry=RetryPolicy(sleep=sleeps.append),
                    client=httpx.Client(transport=httpx.MockTransport(handler)))
    r = b.complete(req())
    assert (r.text, r.prompt_tokens, r.completion_tokens, r.attempts) == ("ok", 11, 3, 3)
    assert sleeps == [0.5, 1.0]


def test_retry_exhaustion_and_non_retryable():
    sleeps = []
    b = LiveBackend(api_key="k", base_url="http://x/v1", retry=RetryPolicy(sleep=sleeps.append),
                    client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(500))))
    with pytest.raises(GatewayError) as exc:
        b.complete(req())
    assert exc.value.attempts == 3 and exc.value.status == 500
    assert exc.value.tag == req().tag
    b = LiveBackend(api_key="k", base_url="http://x/v1", retry=RetryPolicy(sleep=sleeps.append),
                    client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(401))))
    with pytest.raises(GatewayError) as exc:
        b.complete(req())
    assert exc.value.attempts == 1


def test_live_payload_env_and_fallback_tokens(monkeypatch):
    monkeypatch.setenv("FEDSIGHT_API_KEY", "secret")
    monkeypatch.setenv("FEDSIGHT_API_BASE", "http://env/v1")
    monkeypatch.setenv("FEDSIGHT_MODEL", "env-model")
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers["authorization"]
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"content": "abcdefgh"}}]})

    b = LiveBackend(client=httpx.Client(transport=httpx.MockTransport(handler)))
    r = b.complete(req())
    assert seen["url"] == "http://env/v1/chat/completions"
    assert seen["auth"] == "Bearer secret"
    assert seen["body"]["model"] == "env-model"
    assert seen["body"]["messages"][0] == {"role": "system", "content": "sys"}
    assert seen["body"]["max_tokens"] == 1024
    assert r.completion_tokens == 2


def test_transport_error_is_retried():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            raise httpx.ConnectError("down")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    b = LiveBackend(api_key="", base_url="http://x", retry=RetryPolicy(sleep=lambda s: None),
                    client=httpx.Client(transport=httpx.MockTransport(handler)))
    assert b.complete(req()).attempts == 2


def test_fair_limiter_bounds_concurrency():
    limiter = FairLimiter(2)
    active, peak = [0], [0]
    lock = threading.Lock()

    def work():
        with limiter:
            with lock:
                active[0] += 1
                peak[0] = max(peak[0], active[0])
            time.sleep(0.01)
            with lock:
                active[0] -= 1

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert peak[0] == 2


def test_recording_backend_tokens():
    inner = ScriptedBackend([{"meeting_id": "m", "stage": "analyst", "agent_id": "analyst", "responses": ["abcd"]}])
    rec = RecordingBackend(inner)
    r = rec.complete(req(meeting="m"))
    with pytest.raises(FixtureMissError):
        rec.complete(req(meeting="m"))
    assert rec.tokens_for_run("m", 0) == r.total_tokens
    assert len(rec.calls) == 2 and rec.calls[1][1] is None
