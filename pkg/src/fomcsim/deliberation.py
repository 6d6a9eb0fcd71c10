"""The committee workflow.

One run of a meeting goes Analyst -> Economist -> three member analyses ->
exchange round(s) -> votes -> tally -> statement. Strategy ``icl`` adds
retrieved reflections to member prompts; ``cod`` wraps economist and member
calls in Chain-of-Draft prompts whose steps are held to 30 words.
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import prompts
from .core import (
    NUM_MEMBERS, OPTION_LABELS, STRATEGIES, FomcSimError, InvalidInputError, MarketOutlook,
    MeetingSnapshot, Persona, PolicyOption, RateDecision, RunRecord, TranscriptEntry, Vote,
    clamp_decision, validate_options,
)
from .gateway import Backend, CallTag, ChatRequest, ChatResponse

logger = logging.getLogger(__name__)

COD_MAX_WORDS = 30
MEMBER_IDS = tuple(f"member_{i}" for i in range(1, NUM_MEMBERS + 1))
STATEMENT_AGENT = "secretary"
COD_STAGES = frozenset({"economist", "member_analysis", "exchange", "member_vote"})
PREDICTION_STAGES = frozenset({"analyst", "economist", "member_analysis", "exchange", "member_vote", "statement"})


class MemoryFrozenError(FomcSimError):
    pass


@dataclass(frozen=True)
class CommitteeSettings:
    exchange_rounds: int = 1
    max_output_tokens: int = 1024
    temperature: float = 0.7
    memory_limit: int = 5
    seed: int = 0


@dataclass(frozen=True)
class MemberView:
    agent_id: str
    analysis: str
    leaning: str
    confidence: float

    def __post_init__(self):
        if self.leaning not in OPTION_LABELS:
            raise InvalidInputError(f"unknown leaning {self.leaning!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidInputError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class MemoryEntry:
    meeting_id: str
    agent_id: str
    predicted: RateDecision
    actual: RateDecision
    reflection: str
    created_at: str

    def __post_init__(self):
        if not self.reflection.strip():
            raise InvalidInputError("reflection must be non-empty")
        object.__setattr__(self, "predicted", RateDecision(self.predicted))
        object.__setattr__(self, "actual", RateDecision(self.actual))

    def as_dict(self) -> dict:
        return {
            "meeting_id": self.meeting_id,
            "agent_id": self.agent_id,
            "predicted": int(self.predicted),
            "actual": int(self.actual),
            "reflection": self.reflection,
            "created_at": self.created_at,
        }


class MemoryStore:
    """Long-term reflection memory shared by warm-up and backtest runs.

    Call :meth:`freeze` before a backtest; adding to a frozen store raises,
    so backtest runs can read but never grow the memory.
    """

    def __init__(self, entries: Iterable[MemoryEntry] = ()):
        self._entries = list(entries)
        self._frozen = False
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[MemoryEntry, ...]:
        return tuple(self._entries)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def add(self, entry: MemoryEntry) -> None:
        with self._lock:
            if self._frozen:
                raise MemoryFrozenError("memory store is read-only during a backtest")
            self._entries.append(entry)

    def save(self, path: str | Path) -> None:
        payload = [e.as_dict() for e in self._entries]
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MemoryStore":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(MemoryEntry(**item) for item in payload)


def retrieve_memory(store: MemoryStore, agent_id: str, limit: int = 5) -> list[MemoryEntry]:
    """The ``limit`` most recent entries for ``agent_id``, oldest first."""
    if limit <= 0:
        return []
    mine = [(e.meeting_id, i, e) for i, e in enumerate(store.entries) if e.agent_id == agent_id]
    mine.sort(key=lambda t: (t[0], t[1]))
    return [e for _, _, e in mine[-limit:]]


@dataclass(frozen=True)
class CoDDraft:
    steps: tuple[str, ...]
    final: str

    def render(self) -> str:
        lines = [f"{i}. {step}" for i, step in enumerate(self.steps, start=1)]
        lines.append("FINAL:")
        if self.final:
            lines.append(self.final)
        return "\n".join(lines)

    @property
    def valid(self) -> bool:
        return all(len(s.split()) <= COD_MAX_WORDS for s in self.steps)


_STEP_RE = re.compile(r"^\s*(?:step\s*)?\d+\s*[.):]\s*(.*)$", re.IGNORECASE)
_FINAL_RE = re.compile(r"^\s*FINAL\s*:\s*(.*)$", re.IGNORECASE)


def validate_cod(response: str) -> tuple[CoDDraft, list[tuple[int, int]]]:
    """Split a draft into steps and final answer and flag steps over 30 words.

    Returns the draft and a list of ``(step_number, word_count)`` violations.
    Lines after a numbered step and before the next one continue that step.
    """
    steps: list[list[str]] = []
    final_lines: list[str] | None = None
    for line in response.splitlines():
        if final_lines is not None:
            final_lines.append(line)
            continue
        m = _FINAL_RE.match(line)
        if m:
            final_lines = [m.group(1)]
            continue
        m = _STEP_RE.match(line)
        if m:
            steps.append(m.group(1).split())
        elif steps and line.strip():
            steps[-1].extend(line.split())
    draft = CoDDraft(
        steps=tuple(" ".join(words) for words in steps),
        final="\n".join(final_lines or []).strip(),
    )
    violations = [(i, len(words)) for i, words in enumerate(steps, start=1) if len(words) > COD_MAX_WORDS]
    return draft, violations


def truncate_draft(draft: CoDDraft) -> CoDDraft:
    return CoDDraft(tuple(" ".join(s.split()[:COD_MAX_WORDS]) for s in draft.steps), draft.final)


build_cod_prompt = prompts.build_cod_prompt


def derive_seed(seed: int, *parts: object) -> int:
    """Stable sub-seed for a (meeting, run, stage, agent) call."""
    key = "|".join(str(p) for p in (seed, *parts)).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "big") & 0x7FFFFFFF


class MeetingContext:
    """Per-run state: the backend, call tagging, transcript and token tally."""

    def __init__(self, backend: Backend, meeting_id: str, run_index: int, strategy: str,
                 settings: CommitteeSettings | None = None):
        if strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {strategy!r}")
        self.backend = backend
        self.meeting_id = meeting_id
        self.run_index = run_index
        self.strategy = strategy
        self.settings = settings or CommitteeSettings()
        self.transcript: list[TranscriptEntry] = []
        self.tokens = 0
        self.cod_retries = 0

    def call(self, stage: str, agent_id: str, system: str, messages: Sequence[tuple[str, str]]) -> ChatResponse:
        req = ChatRequest(
            system_prompt=system,
            messages=tuple(messages),
            tag=CallTag(self.meeting_id, stage, agent_id, self.run_index),
            max_output_tokens=self.settings.max_output_tokens,
            temperature=self.settings.temperature,
            seed=derive_seed(self.settings.seed, self.meeting_id, self.run_index, stage, agent_id),
        )
        resp = self.backend.complete(req)
        self.tokens += resp.total_tokens
        return resp

    def record(self, stage: str, agent_id: str, text: str) -> None:
        self.transcript.append(TranscriptEntry(stage, agent_id, text))

    def ask(self, stage: str, agent_id: str, system: str, user: str) -> str:
        """One agent turn; returns the text to parse and records the transcript entry.

        Under ``cod`` the prompt is wrapped, the draft validated, retried once
        on a word-limit violation, then truncated if still too long.
        """
        if self.strategy != "cod" or stage not in COD_STAGES:
            text = self.call(stage, agent_id, system, [("user", user)]).text
            self.record(stage, agent_id, text)
            return text
        cod_user = build_cod_prompt(user)
        raw = self.call(stage, agent_id, system, [("user", cod_user)]).text
        draft, violations = validate_cod(raw)
        if violations:
            self.cod_retries += 1
            logger.info("%s/%s run%d: CoD violation %s; retrying", self.meeting_id, agent_id,
                        self.run_index, violations)
            retry_msgs = [("user", cod_user), ("assistant", raw), ("user", prompts.cod_feedback(violations))]
            raw = self.call(stage, agent_id, system, retry_msgs).text
            draft, violations = validate_cod(raw)
            if violations:
                logger.warning("%s/%s run%d: CoD steps still too long after retry; truncating",
                               self.meeting_id, agent_id, self.run_index)
                draft = truncate_draft(draft)
        self.record(stage, agent_id, draft.render())
        return draft.final if draft.final else raw


_PROB_RE = re.compile(r"\b(cut|hike)\s*(\d+)\s*(?:bps?)?\s*[:=]\s*([0-9]*\.?[0-9]+)\s*(%?)", re.IGNORECASE)
_HOLD_RE = re.compile(r"\b(hold|unchanged|no change)\s*[:=]\s*([0-9]*\.?[0-9]+)\s*(%?)", re.IGNORECASE)


def parse_outlook(text: str) -> MarketOutlook | None:
    probs: dict[int, float] = {}
    for kind, bps, value, _pct in _PROB_RE.findall(text):
        bps = int(bps)
        if bps % 25:
            continue
        delta = clamp_decision(-bps if kind.lower() == "cut" else bps)
        probs[delta] = probs.get(delta, 0.0) + float(value)
    for _kind, value, _pct in _HOLD_RE.findall(text):
        probs[0] = probs.get(0, 0.0) + float(value)
    if not probs or sum(probs.values()) <= 0:
        return None
    return MarketOutlook(probs)


def run_analyst(ctx: MeetingContext, snapshot: MeetingSnapshot) -> MarketOutlook:
    text = ctx.ask("analyst", "analyst", prompts.ANALYST_SYSTEM, prompts.analyst_prompt(snapshot))
    outlook = parse_outlook(text)
    if outlook is None:
        logger.warning("%s run%d: analyst response unparseable; using uniform outlook",
                       ctx.meeting_id, ctx.run_index)
        outlook = MarketOutlook.uniform()
    return outlook


def render_outlook(outlook: MarketOutlook) -> str:
    return ", ".join(f"{int(d):+d} bps: {p:.3f}" for d, p in outlook.probs.items())


_OPTION_HEAD = r"\b(?:dovish|neutral|hawkish)\b\s*(?:option)?\s*[:=]"
_OPTION_RE = re.compile(
    r"\b(dovish|neutral|hawkish)\b\s*(?:option)?\s*[:=]\s*([+\-−]?\d+)\s*(?:bps?|basis points)?"
    r"\s*[|:;,\-]?\s*(.*?)\s*(?=" + _OPTION_HEAD + r"|$)",
    re.IGNORECASE | re.MULTILINE,
)


def parse_options(text: str) -> tuple[PolicyOption, ...] | None:
    found: dict[str, PolicyOption] = {}
    for label, delta, rationale in _OPTION_RE.findall(text):
        label = label.lower()
        if label in found:
            continue
        try:
            found[label] = PolicyOption(label, RateDecision(int(delta.replace("−", "-"))),
                                        rationale.strip())
        except (InvalidInputError, ValueError):
            return None
    if set(found) != set(OPTION_LABELS):
        return None
    try:
        return validate_options(list(found.values()))
    except InvalidInputError:
        return None


_GENERIC_RATIONALE = {
    "dovish": "Ease policy in case the outlook weakens more than markets expect.",
    "neutral": "Follow the market-implied central expectation.",
    "hawkish": "Tighten policy in case inflation pressures persist.",
}


def default_options(outlook: MarketOutlook) -> tuple[PolicyOption, ...]:
    """Fallback triple built from the outlook: its mode flanked by the support extremes."""
    neutral = max(-75, min(75, int(outlook.mode())))
    support = [int(d) for d in outlook.support]
    dovish = min(support) if min(support) < neutral else neutral - 25
    hawkish = max(support) if max(support) > neutral else neutral + 25
    return validate_options([
        PolicyOption("dovish", clamp_decision(dovish), _GENERIC_RATIONALE["dovish"]),
        PolicyOption("neutral", RateDecision(neutral), _GENERIC_RATIONALE["neutral"]),
        PolicyOption("hawkish", clamp_decision(hawkish), _GENERIC_RATIONALE["hawkish"]),
    ])


def run_economist(ctx: MeetingContext, snapshot: MeetingSnapshot,
                  outlook: MarketOutlook) -> tuple[PolicyOption, ...]:
    text = ctx.ask("economist", "economist", prompts.ECONOMIST_SYSTEM,
                   prompts.economist_prompt(snapshot, render_outlook(outlook)))
    options = parse_options(text)
    if options is None:
        logger.warning("%s run%d: economist options unparseable or not increasing; using default triple",
                       ctx.meeting_id, ctx.run_index)
        options = default_options(outlook)
    return options


_LEANING_RE = re.compile(r"LEANING\s*:\s*\**\s*(dovish|neutral|hawkish)\b", re.IGNORECASE)
_CONFIDENCE_RE = re.compile(r"CONFIDENCE\s*:\s*\**\s*([0-9]*\.?[0-9]+)\s*(%?)", re.IGNORECASE)


def parse_leaning(text: str) -> tuple[str | None, float | None]:
    m = _LEANING_RE.search(text)
    leaning = m.group(1).lower() if m else None
    c = _CONFIDENCE_RE.search(text)
    confidence = None
    if c:
        confidence = float(c.group(1)) / (100.0 if c.group(2) else 1.0)
        confidence = min(1.0, max(0.0, confidence))
    return leaning, confidence


def _member_system(persona: Persona) -> str:
    return prompts.MEMBER_SYSTEM.format(persona=persona.prompt_block)


def run_member_analysis(ctx: MeetingContext, persona: Persona, agent_id: str, snapshot: MeetingSnapshot,
                        options: Sequence[PolicyOption], memory: Sequence[MemoryEntry] = ()) -> MemberView:
    if memory and ctx.strategy != "icl":
        raise InvalidInputError("memory is only used by the icl strategy")
    reflections = [m.reflection for m in memory]
    text = ctx.ask("member_analysis", agent_id, _member_system(persona),
                   prompts.member_prompt(snapshot, options, reflections))
    leaning, confidence = parse_leaning(text)
    if leaning is None:
        logger.warning("%s run%d: %s leaning unparseable; defaulting to neutral",
                       ctx.meeting_id, ctx.run_index, agent_id)
        leaning, confidence = "neutral", 0.5
    return MemberView(agent_id, text, leaning, 0.5 if confidence is None else confidence)


def run_exchange(ctx: MeetingContext, views: Sequence[MemberView], personas: Sequence[Persona],
                 options: Sequence[PolicyOption]) -> tuple[list[MemberView], list[TranscriptEntry]]:
    """One round: each member reads the other two analyses and may revise."""
    if len(views) != NUM_MEMBERS:
        raise InvalidInputError(f"exchange needs exactly {NUM_MEMBERS} views")
    start = len(ctx.transcript)
    revised = []
    for view, persona in zip(views, personas):
        others = [(v.agent_id, v.analysis) for v in views if v.agent_id != view.agent_id]
        text = ctx.ask("exchange", view.agent_id, _member_system(persona),
                       prompts.exchange_prompt(view.analysis, others, options))
        leaning, confidence = parse_leaning(text)
        revised.append(MemberView(
            view.agent_id,
            text,
            leaning or view.leaning,
            view.confidence if confidence is None else confidence,
        ))
    return revised, ctx.transcript[start:]


_VOTE_RE = re.compile(r"VOTE\s*:\s*\**\s*([A-Za-z+\-−]?[\w]*)", re.IGNORECASE)
_JUSTIFICATION_RE = re.compile(r"JUSTIFICATION\s*:\s*(.*)", re.IGNORECASE | re.DOTALL)


def parse_vote(text: str, options: Sequence[PolicyOption]) -> tuple[PolicyOption | None, str]:
    m = _VOTE_RE.search(text)
    j = _JUSTIFICATION_RE.search(text)
    justification = j.group(1).strip() if j else text.strip()
    if not m:
        return None, justification
    token = m.group(1).lower().replace("−", "-")
    for option in options:
        if token == option.label:
            return option, justification
    try:
        bps = int(token.removesuffix("bps"))
    except ValueError:
        return None, justification
    for option in options:
        if option.delta_bps == bps:
            return option, justification
    return None, justification


def collect_votes(ctx: MeetingContext, views: Sequence[MemberView], personas: Sequence[Persona],
                  options: Sequence[PolicyOption]) -> list[Vote]:
    by_label = {o.label: o for o in options}
    votes = []
    for view, persona in zip(views, personas):
        text = ctx.ask("member_vote", view.agent_id, _member_system(persona),
                       prompts.vote_prompt(view.analysis, options))
        option, justification = parse_vote(text, options)
        fallback = option is None
        if fallback:
            logger.warning("%s run%d: %s vote unparseable or names no option; using leaning %s",
                           ctx.meeting_id, ctx.run_index, view.agent_id, view.leaning)
            option = by_label[view.leaning]
        votes.append(Vote(view.agent_id, option.label, option.delta_bps, justification, fallback=fallback))
    return votes


def tally(votes: Sequence[Vote], outlook: MarketOutlook) -> RateDecision:
    """Majority of three; a 1-1-1 split goes to the outlook's most likely voted
    option, and any remaining tie to the neutral option."""
    if len(votes) != NUM_MEMBERS:
        raise InvalidInputError(f"tally needs exactly {NUM_MEMBERS} votes")
    label, count = Counter(v.option_label for v in votes).most_common(1)[0]
    if count >= 2:
        return next(v.delta_bps for v in votes if v.option_label == label)
    best = max(outlook.prob(v.delta_bps) for v in votes)
    top = [v for v in votes if outlook.prob(v.delta_bps) == best]
    if len(top) == 1:
        return top[0].delta_bps
    return next(v.delta_bps for v in votes if v.option_label == "neutral")


_DECISION_TAG_RE = re.compile(r"DECISION\s*:\s*([+\-−]?\d+)", re.IGNORECASE)
_MOVE_RE = re.compile(
    r"\b(raise|raised|raising|increase|increased|increasing|lower|lowered|lowering|reduce|reduced|reducing|cut|cuts)\b"
    r"[^.\n]*?\b(\d+)\s*(?:basis points?|bps?)\b",
    re.IGNORECASE,
)
_HOLD_STMT_RE = re.compile(r"\b(maintain|maintained|maintaining|hold|held|holding|unchanged|keep|kept)\b",
                           re.IGNORECASE)


def stated_decision(text: str) -> int | None:
    """The rate change a statement announces, if one can be read off it."""
    candidates = []
    m = _DECISION_TAG_RE.search(text)
    if m:
        candidates.append((m.start(), int(m.group(1).replace("−", "-"))))
    m = _MOVE_RE.search(text)
    if m:
        sign = 1 if m.group(1).lower().startswith(("rais", "increas")) else -1
        candidates.append((m.start(), sign * int(m.group(2))))
    m = _HOLD_STMT_RE.search(text)
    if m:
        candidates.append((m.start(), 0))
    return min(candidates)[1] if candidates else None


def decision_header(decision: RateDecision) -> str:
    return f"Decision: the Committee decided to {decision.describe()}."


def synthesize_statement(ctx: MeetingContext, decision: RateDecision, votes: Sequence[Vote],
                         snapshot: MeetingSnapshot) -> str:
    summary = "\n".join(f"- {v.agent_id}: {v.option_label} ({int(v.delta_bps):+d} bps)" for v in votes)
    text = ctx.ask("statement", STATEMENT_AGENT, prompts.SECRETARY_SYSTEM,
                   prompts.statement_prompt(decision, summary, snapshot)).strip()
    if not text:
        logger.warning("%s run%d: empty statement; using header only", ctx.meeting_id, ctx.run_index)
        return decision_header(decision)
    if stated_decision(text) != int(decision):
        logger.warning("%s run%d: statement does not announce %+d bps; prepending header",
                       ctx.meeting_id, ctx.run_index, int(decision))
        return f"{decision_header(decision)}\n\n{text}"
    return text


def run_meeting(snapshot: MeetingSnapshot, personas: Sequence[Persona], strategy: str, run_index: int,
                store: MemoryStore | None, backend: Backend,
                settings: CommitteeSettings | None = None) -> RunRecord:
    """Simulate one meeting once. Stage failures give a failed record with the
    transcript so far instead of raising."""
    if len(personas) != NUM_MEMBERS:
        raise InvalidInputError(f"need exactly {NUM_MEMBERS} personas")
    ctx = MeetingContext(backend, snapshot.meeting_id, run_index, strategy, settings)
    outlook = None
    options: tuple[PolicyOption, ...] = ()
    try:
        outlook = run_analyst(ctx, snapshot)
        options = run_economist(ctx, snapshot, outlook)
        views = []
        for agent_id, persona in zip(MEMBER_IDS, personas):
            memory = ()
            if strategy == "icl" and store is not None:
                memory = retrieve_memory(store, agent_id, ctx.settings.memory_limit)
            views.append(run_member_analysis(ctx, persona, agent_id, snapshot, options, memory))
        for _ in range(ctx.settings.exchange_rounds):
            views, _segment = run_exchange(ctx, views, personas, options)
        votes = collect_votes(ctx, views, personas, options)
        decision = tally(votes, outlook)
        statement = synthesize_statement(ctx, decision, votes, snapshot)
    except FomcSimError as exc:
        logger.error("%s run%d (%s) failed: %s", snapshot.meeting_id, run_index, strategy, exc)
        return RunRecord(snapshot.meeting_id, run_index, strategy, (), None, "", tuple(ctx.transcript),
                         ctx.tokens, outlook, options, error=str(exc))
    return RunRecord(snapshot.meeting_id, run_index, strategy, tuple(votes), decision, statement,
                     tuple(ctx.transcript), ctx.tokens, outlook, options)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def icl_warmup(snapshots: Sequence[MeetingSnapshot], store: MemoryStore, backend: Backend,
               personas: Sequence[Persona], settings: CommitteeSettings | None = None,
               clock: Callable[[], str] = _utc_now) -> MemoryStore:
    """Simulate past meetings in date order, reveal each outcome after the
    vote, and store one reflection per member.

    A gateway failure drops that meeting's entries but keeps earlier ones.
    """
    for snapshot in sorted(snapshots, key=lambda s: s.meeting_id):
        record = run_meeting(snapshot, personas, "icl", 0, store, backend, settings)
        if not record.ok:
            logger.warning("warm-up meeting %s skipped: %s", snapshot.meeting_id, record.error)
            continue
        ctx = MeetingContext(backend, snapshot.meeting_id, 0, "icl", settings)
        reasoning = {e.agent_id: e.text for e in record.transcript if e.stage == "member_vote"}
        pending = []
        try:
            for vote, persona in zip(record.votes, personas):
                text = ctx.ask(
                    "reflection", vote.agent_id,
                    prompts.REFLECTION_SYSTEM.format(persona=persona.prompt_block),
                    prompts.reflection_prompt(snapshot, vote.delta_bps, snapshot.actual,
                                              reasoning.get(vote.agent_id, vote.justification)),
                ).strip()
                if not text:
                    text = (f"Voted {int(vote.delta_bps):+d} bps; the outcome was "
                            f"{int(snapshot.actual):+d} bps.")
                pending.append(MemoryEntry(snapshot.meeting_id, vote.agent_id, vote.delta_bps,
                                           snapshot.actual, text, clock()))
        except FomcSimError as exc:
            logger.warning("warm-up meeting %s reflection failed: %s", snapshot.meeting_id, exc)
            continue
        for entry in pending:
            store.add(entry)
    return store
