"""Prompt templates for every committee role.

Builders here only read the fields of a snapshot that agents are allowed to
see; the realized decision is rendered solely by :func:`reveal_text`, which
is used after voting during warm-up reflection.
"""
from __future__ import annotations

from typing import Sequence

from .core import MeetingSnapshot, PolicyOption, RateDecision, StructuredIndicators

ANALYST_SYSTEM = (
    "You are the market Analyst for a simulated FOMC meeting. Read the fed funds futures "
    "(FedWatch) summary and the economic indicators, and state the market-implied probability "
    "of each rate outcome. Answer on one line using keys cut<bps>, hold, hike<bps>, for example:\n"
    "cut25: 0.10, hold: 0.70, hike25: 0.20"
)

ECONOMIST_SYSTEM = (
    "You are the staff Economist for a simulated FOMC meeting. Propose exactly three policy "
    "options, from most accommodative to most restrictive, each with a one-sentence macro "
    "rationale. Changes are in basis points on a 25 bp grid. Answer with three lines:\n"
    "DOVISH: <bps> | <rationale>\nNEUTRAL: <bps> | <rationale>\nHAWKISH: <bps> | <rationale>"
)

MEMBER_SYSTEM = (
    "You are a voting member of a simulated Federal Open Market Committee.\n{persona}\n"
    "Reason from the data you are given. When asked for your position, end with the lines\n"
    "LEANING: <dovish|neutral|hawkish>\nCONFIDENCE: <number between 0 and 1>"
)

VOTE_INSTRUCTION = (
    "Cast your final vote on the three options. Answer with the lines\n"
    "VOTE: <dovish|neutral|hawkish>\nJUSTIFICATION: <one or two sentences>"
)

SECRETARY_SYSTEM = (
    "You draft the post-meeting FOMC policy statement. The statement must state the "
    "Committee's decision on the target range explicitly and summarize its rationale."
)

REFLECTION_SYSTEM = (
    "You are a voting member of a simulated Federal Open Market Committee reviewing a past "
    "meeting.\n{persona}\nWrite a short reflection: what you got right or wrong and what you "
    "will weigh differently next time."
)

BEIGE_BOOK_PREAMBLE = (
    "Beige Book (verbatim). Anecdotal reports from the twelve Federal Reserve districts. "
    "Focus on labor-market tightness, price pressures and regional differences in activity."
)
DOTPLOT_PREAMBLE = (
    "Dot plot (verbalized). Count of participants projecting each end-of-year target-rate "
    "range. Focus on the median path and the dispersion of views."
)
FEDWATCH_PREAMBLE = (
    "FedWatch (verbatim). Market-implied probabilities from fed funds futures. Focus on what "
    "markets expect for this meeting and how firmly."
)

COD_INSTRUCTION = (
    "Think in Chain-of-Draft style: write numbered draft steps (\"1.\", \"2.\", ...), each at "
    "most 30 words, keeping only the essential reasoning. Then write a line \"FINAL:\" followed "
    "by your answer in the required format."
)

_INDICATOR_LABELS = (
    ("pce_yoy", "PCE price index, YoY", "{:.2f}%"),
    ("cpi_yoy", "CPI (all urban consumers), YoY", "{:.2f}%"),
    ("inflation_expect_1y", "One-year-ahead inflation expectations", "{:.2f}%"),
    ("tb3m", "3-month Treasury bill yield", "{:.2f}%"),
    ("tb6m", "6-month Treasury bill yield", "{:.2f}%"),
    ("m2_supply", "M2 money stock, seasonally adjusted", "${:,.0f} billion"),
    ("bbk_gdp", "Real-time GDP growth estimate (BBK)", "{:.2f}%"),
    ("unemployment", "Unemployment rate (U-3)", "{:.1f}%"),
    ("vix", "VIX volatility index", "{:.2f}"),
    ("fed_chair", "Fed Chair", "{}"),
    ("white_house_party", "White House party", "{}"),
    ("prev_fftr", "Federal funds target range midpoint before this meeting", "{:.3f}%"),
    ("prev_change_bps", "Change at the previous meeting", "{:+d} bps"),
)


def render_indicators(ind: StructuredIndicators) -> str:
    return "\n".join(f"- {label}: {fmt.format(getattr(ind, name))}" for name, label, fmt in _INDICATOR_LABELS)


def render_options(options: Sequence[PolicyOption]) -> str:
    return "\n".join(f"- {o.label}: {int(o.delta_bps):+d} bps. {o.rationale}".rstrip() for o in options)


def render_unstructured(snapshot: MeetingSnapshot) -> str:
    blocks = [
        (BEIGE_BOOK_PREAMBLE, snapshot.beige_book),
        (DOTPLOT_PREAMBLE, snapshot.dotplot_verbalized),
        (FEDWATCH_PREAMBLE, snapshot.fedwatch_text),
    ]
    return "\n\n".join(f"{pre}\n{text.strip() or '(not available)'}" for pre, text in blocks)


def render_snapshot(snapshot: MeetingSnapshot) -> str:
    """Structured indicators followed by the standardized unstructured blocks."""
    return (
        f"Meeting date: {snapshot.meeting_id}\n\n"
        f"Structured indicators (values available two days before the meeting):\n"
        f"{render_indicators(snapshot.indicators)}\n\n"
        f"{render_unstructured(snapshot)}"
    )


def analyst_prompt(snapshot: MeetingSnapshot) -> str:
    return (
        f"Meeting date: {snapshot.meeting_id}\n\n"
        f"{FEDWATCH_PREAMBLE}\n{snapshot.fedwatch_text.strip() or '(not available)'}\n\n"
        f"Structured indicators:\n{render_indicators(snapshot.indicators)}\n\n"
        "State the market-implied probability of each outcome."
    )


def economist_prompt(snapshot: MeetingSnapshot, outlook_text: str) -> str:
    return (
        f"{render_snapshot(snapshot)}\n\n"
        f"Analyst's market-implied outlook:\n{outlook_text}\n\n"
        "Propose the three policy options."
    )


def member_prompt(snapshot: MeetingSnapshot, options: Sequence[PolicyOption],
                  reflections: Sequence[str] = ()) -> str:
    parts = [render_snapshot(snapshot), f"Policy options proposed by the Economist:\n{render_options(options)}"]
    if reflections:
        lessons = "\n".join(f"- {r.strip()}" for r in reflections)
        parts.append(f"Lessons from your past simulated meetings (oldest first):\n{lessons}")
    parts.append("Analyze the data independently and state which option you lean toward.")
    return "\n\n".join(parts)


def exchange_prompt(own_analysis: str, others: Sequence[tuple[str, str]],
                    options: Sequence[PolicyOption]) -> str:
    peer_text = "\n\n".join(f"{agent} wrote:\n{text.strip()}" for agent, text in others)
    return (
        f"Your earlier analysis:\n{own_analysis.strip()}\n\n"
        f"Your colleagues' analyses:\n{peer_text}\n\n"
        f"Options:\n{render_options(options)}\n\n"
        "Respond to your colleagues and restate your position; you may revise it."
    )


def vote_prompt(current_analysis: str, options: Sequence[PolicyOption]) -> str:
    return (
        f"Your position after the discussion:\n{current_analysis.strip()}\n\n"
        f"Options:\n{render_options(options)}\n\n{VOTE_INSTRUCTION}"
    )


def statement_prompt(decision: RateDecision, vote_summary: str, snapshot: MeetingSnapshot) -> str:
    return (
        f"Meeting date: {snapshot.meeting_id}\n"
        f"The Committee voted to {decision.describe()}.\n"
        f"Votes:\n{vote_summary}\n\n"
        f"Economic conditions:\n{render_indicators(snapshot.indicators)}\n\n"
        "Draft the policy statement."
    )


def reveal_text(actual: RateDecision) -> str:
    """The only rendering of a realized decision that reaches any prompt."""
    return f"REVEALED OUTCOME: the actual FOMC decision was to {actual.describe()} ({int(actual):+d} bps)."


def reflection_prompt(snapshot: MeetingSnapshot, predicted: RateDecision, actual: RateDecision,
                      own_reasoning: str) -> str:
    return (
        f"Meeting date: {snapshot.meeting_id}\n"
        f"You voted for {int(predicted):+d} bps. Your reasoning was:\n{own_reasoning.strip()}\n\n"
        f"{reveal_text(actual)}\n\n"
        "Reflect on any gap in your reasoning and what you will do differently."
    )


def build_cod_prompt(base_prompt: str) -> str:
    return f"{base_prompt}\n\n{COD_INSTRUCTION}"


def cod_feedback(violations: Sequence[tuple[int, int]]) -> str:
    listed = ", ".join(f"step {i} has {n} words" for i, n in violations)
    return f"Your draft broke the 30-word limit ({listed}). Rewrite it so every step has at most 30 words."
