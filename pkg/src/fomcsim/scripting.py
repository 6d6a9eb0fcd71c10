"""Build scripted-backend fixtures from per-meeting vote plans.

A plan says, for each run, which option each member votes for; this module
turns it into fixture entries (one per call tag) with plausible response
text in plain or Chain-of-Draft form.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .core import OPTION_LABELS, InvalidInputError, RateDecision
from .deliberation import MEMBER_IDS, STATEMENT_AGENT

STYLES = ("plain", "cod")

_OPTION_NOTES = {
    "dovish": "Ease to cushion slowing activity and cooling labor demand.",
    "neutral": "Act in line with market pricing and the data since the last meeting.",
    "hawkish": "Tighten further to keep inflation expectations anchored.",
}

_DRAFT_STEPS = {
    "dovish": ("Growth and hiring softening; downside risks rising.",
               "Inflation easing toward target; real rates restrictive.",
               "Favor easing."),
    "neutral": ("Data mixed; inflation progress uneven, labor market balanced.",
                "Markets price this outcome firmly.",
                "Favor the central option."),
    "hawkish": ("Inflation still well above target; core sticky.",
                "Labor market tight; expectations at risk.",
                "Favor tightening."),
}


@dataclass(frozen=True)
class RunPlan:
    votes: tuple[str, str, str]
    leanings: tuple[str, str, str] | None = None
    # stages whose first member response breaks the word limit (CoD retry)
    long_first_draft: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "votes", tuple(self.votes))
        if len(self.votes) != len(MEMBER_IDS) or any(v not in OPTION_LABELS for v in self.votes):
            raise InvalidInputError(f"bad vote plan {self.votes}")


@dataclass(frozen=True)
class MeetingPlan:
    meeting_id: str
    outlook: Mapping[int, float]
    options: tuple[int, int, int]
    runs: tuple[RunPlan, ...]
    actual: int | None = None
    reflections: bool = False
    notes: Mapping[str, str] = field(default_factory=dict)

    def decision(self, run: RunPlan) -> int:
        """Plans always have a majority, so the decision is the majority option."""
        for label in OPTION_LABELS:
            if run.votes.count(label) >= 2:
                return self.options[OPTION_LABELS.index(label)]
        raise InvalidInputError(f"{self.meeting_id}: run plan {run.votes} has no majority")


def consensus_runs(label: str, runs: int = 5, deviant: tuple[int, int, str] | None = None) -> tuple[RunPlan, ...]:
    """``runs`` unanimous runs, optionally with one member voting otherwise in one run."""
    out = []
    for j in range(runs):
        votes = [label] * len(MEMBER_IDS)
        if deviant is not None and deviant[0] == j:
            votes[deviant[1]] = deviant[2]
        out.append(RunPlan(tuple(votes)))
    return tuple(out)


def analyst_text(outlook: Mapping[int, float]) -> str:
    parts = []
    for delta, p in sorted(outlook.items()):
        delta = int(delta)
        key = "hold" if delta == 0 else (f"cut{-delta}" if delta < 0 else f"hike{delta}")
        parts.append(f"{key}: {p:.2f}")
    return ", ".join(parts)


def _cod(steps: Sequence[str], final: str) -> str:
    lines = [f"{i}. {s}" for i, s in enumerate(steps, start=1)]
    return "\n".join(lines + ["FINAL:", final])


def economist_text(options: Sequence[int], style: str, notes: Mapping[str, str] | None = None) -> str:
    notes = {**_OPTION_NOTES, **(notes or {})}
    lines = "\n".join(f"{label.upper()}: {int(d):+d} | {notes[label]}" for label, d in zip(OPTION_LABELS, options))
    if style == "cod":
        return _cod(("Inflation, labor and growth reviewed against targets.",
                     "Market pricing anchors the central option."), lines)
    return f"Given the data, three options.\n{lines}"


def analysis_text(leaning: str, style: str, confidence: float = 0.8, long: bool = False) -> str:
    tail = f"LEANING: {leaning}\nCONFIDENCE: {confidence:.2f}"
    steps = list(_DRAFT_STEPS[leaning])
    if long:
        steps[0] = " ".join(["Inflation"] + ["data"] * 34)
    if style == "cod":
        return _cod(steps, tail)
    return " ".join(steps) + "\n" + tail


def vote_text(label: str, style: str) -> str:
    tail = f"VOTE: {label}\nJUSTIFICATION: {_OPTION_NOTES[label]}"
    if style == "cod":
        return _cod((_DRAFT_STEPS[label][2], "Discussion did not change the balance of risks."), tail)
    return tail


def statement_text(decision: int) -> str:
    decision = RateDecision(decision)
    return (
        f"Recent indicators suggest that economic activity has been expanding at a solid pace. "
        f"In support of its goals, the Committee decided to {decision.describe()}. "
        f"The Committee will continue to assess incoming information for its implications "
        f"for the economic outlook."
    )


def reflection_text(predicted: int, actual: int) -> str:
    if predicted == actual:
        return f"My {predicted:+d} bp call matched the outcome; keep weighting market pricing and core inflation."
    return (f"I voted {predicted:+d} bps but the Committee moved {actual:+d} bps; "
            f"weigh the market-implied path and the Chair's guidance more heavily.")


def plan_entries(plan: MeetingPlan, style: str = "cod") -> list[dict]:
    if style not in STYLES:
        raise InvalidInputError(f"style must be one of {STYLES}")
    mid = plan.meeting_id
    entries = [
        {"meeting_id": mid, "stage": "analyst", "agent_id": "analyst", "run_index": "*",
         "responses": [analyst_text(plan.outlook)]},
        {"meeting_id": mid, "stage": "economist", "agent_id": "economist", "run_index": "*",
         "responses": [economist_text(plan.options, style, plan.notes)]},
    ]
    for j, run in enumerate(plan.runs):
        leanings = run.leanings or run.votes
        for agent, leaning, vote in zip(MEMBER_IDS, leanings, run.votes):
            first = [analysis_text(leaning, style, long=True)] if "member_analysis" in run.long_first_draft else []
            entries.append({"meeting_id": mid, "stage": "member_analysis", "agent_id": agent, "run_index": j,
                            "responses": first + [analysis_text(leaning, style)]})
            entries.append({"meeting_id": mid, "stage": "exchange", "agent_id": agent, "run_index": j,
                            "responses": [analysis_text(vote, style, confidence=0.85)]})
            entries.append({"meeting_id": mid, "stage": "member_vote", "agent_id": agent, "run_index": j,
                            "responses": [vote_text(vote, style)]})
        entries.append({"meeting_id": mid, "stage": "statement", "agent_id": STATEMENT_AGENT, "run_index": j,
                        "responses": [statement_text(plan.decision(run))]})
    if plan.reflections:
        if plan.actual is None:
            raise InvalidInputError(f"{mid}: reflections need the actual decision")
        run = plan.runs[0]
        for agent, vote in zip(MEMBER_IDS, run.votes):
            predicted = plan.options[OPTION_LABELS.index(vote)]
            entries.append({"meeting_id": mid, "stage": "reflection", "agent_id": agent, "run_index": 0,
                            "responses": [reflection_text(predicted, plan.actual)]})
    return entries


def build_fixture(plans: Sequence[MeetingPlan], style: str = "cod") -> list[dict]:
    entries = []
    for plan in sorted(plans, key=lambda p: p.meeting_id):
        entries.extend(plan_entries(plan, style))
    return entries


def write_fixture(path: str | Path, entries: Sequence[Mapping]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(list(entries), indent=1) + "\n", encoding="utf-8")
