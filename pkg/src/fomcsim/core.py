"""Shared domain types.

Everything here is an immutable value object; no I/O and no provider calls.
Rate decisions are integer basis points on a 25 bp grid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import date
from types import MappingProxyType
from typing import Mapping, Sequence

logger = logging.getLogger(__name__)

GRID_BPS = 25
MAX_MOVE_BPS = 100
NUM_MEMBERS = 3

OPTION_LABELS = ("dovish", "neutral", "hawkish")
STRATEGIES = ("baseline", "icl", "cod")
ARCHETYPES = ("RegionalPragmatist", "AcademicBalancer", "CentralPolicymaker")


class FomcSimError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(FomcSimError, ValueError):
    pass


class RateDecision(int):
    """A target-rate change in basis points.

    Subclasses ``int`` so decisions hash, compare and serialize like plain
    integers, but construction enforces the grid and the +/-100 bp bound.
    """

    def __new__(cls, delta_bps) -> "RateDecision":
        if isinstance(delta_bps, bool):
            raise InvalidInputError("bool is not a rate decision")
        if isinstance(delta_bps, float):
            if not math.isfinite(delta_bps) or delta_bps != int(delta_bps):
                raise InvalidInputError(f"rate decision must be integral bps, got {delta_bps!r}")
        value = int(delta_bps)
        if value % GRID_BPS != 0:
            raise InvalidInputError(f"{value} bps is not a multiple of {GRID_BPS}")
        if abs(value) > MAX_MOVE_BPS:
            raise InvalidInputError(f"{value} bps exceeds the +/-{MAX_MOVE_BPS} bp bound")
        return super().__new__(cls, value)

    def __repr__(self) -> str:
        return f"RateDecision({int(self):+d})"

    @property
    def delta_bps(self) -> int:
        return int(self)

    @property
    def percent(self) -> float:
        return int(self) / 100.0

    def describe(self) -> str:
        bps = int(self)
        if bps == 0:
            return "maintain the target range"
        verb = "raise" if bps > 0 else "lower"
        return f"{verb} the target range by {abs(bps)} basis points"


def clamp_decision(delta_bps: int) -> RateDecision:
    """Build a decision from agent output, clamping out-of-range moves."""
    if abs(delta_bps) > MAX_MOVE_BPS:
        clamped = MAX_MOVE_BPS if delta_bps > 0 else -MAX_MOVE_BPS
        logger.warning("decision %+d bps outside +/-%d bp bound; clamped to %+d",
                       delta_bps, MAX_MOVE_BPS, clamped)
        delta_bps = clamped
    return RateDecision(delta_bps)


def snap_to_grid(raw_change: float) -> RateDecision:
    """Map a change in percentage points to the nearest 25 bp step.

    Exact midpoints round away from zero; ``0.375`` maps to ``+50``.
    """
    raw = float(raw_change)
    if not math.isfinite(raw):
        raise InvalidInputError(f"cannot snap non-finite change {raw_change!r}")
    steps = raw * 100.0 / GRID_BPS
    n = math.floor(abs(steps) + 0.5)
    bps = int(math.copysign(n, steps)) * GRID_BPS if n else 0
    return clamp_decision(bps)


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class StructuredIndicators:
    pce_yoy: float
    cpi_yoy: float
    inflation_expect_1y: float
    tb3m: float
    tb6m: float
    m2_supply: float
    bbk_gdp: float
    unemployment: float
    vix: float
    fed_chair: str
    white_house_party: str
    prev_fftr: float
    prev_change_bps: int

    NUMERIC = (
        "pce_yoy", "cpi_yoy", "inflation_expect_1y", "tb3m", "tb6m", "m2_supply",
        "bbk_gdp", "unemployment", "vix", "prev_fftr", "prev_change_bps",
    )
    CATEGORICAL = ("fed_chair", "white_house_party")

    def __post_init__(self):
        for name in self.NUMERIC:
            _finite(name, float(getattr(self, name)))
        if not 0.0 <= self.unemployment <= 100.0:
            raise InvalidInputError(f"unemployment {self.unemployment} outside [0, 100]")
        if self.vix < 0:
            raise InvalidInputError(f"vix must be non-negative, got {self.vix}")
        if float(self.prev_change_bps) % GRID_BPS != 0:
            raise InvalidInputError(f"prev_change_bps {self.prev_change_bps} is off the 25 bp grid")
        object.__setattr__(self, "prev_change_bps", int(self.prev_change_bps))

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.NUMERIC + self.CATEGORICAL}


@dataclass(frozen=True)
class MarketOutlook:
    """Market-implied probabilities over rate decisions, always normalized."""

    probs: Mapping[RateDecision, float]

    def __post_init__(self):
        raw = {RateDecision(k): float(v) for k, v in dict(self.probs).items()}
        if not raw:
            raise InvalidInputError("market outlook needs at least one outcome")
        if any(not math.isfinite(v) or v < 0 for v in raw.values()):
            raise InvalidInputError("outlook probabilities must be finite and non-negative")
        total = math.fsum(raw.values())
        if total <= 0:
            raise InvalidInputError("outlook probabilities sum to zero")
        normalized = {k: raw[k] / total for k in sorted(raw)}
        object.__setattr__(self, "probs", MappingProxyType(normalized))

    @classmethod
    def uniform(cls, deltas: Sequence[int] = (-25, 0, 25)) -> "MarketOutlook":
        return cls({d: 1.0 for d in deltas})

    def prob(self, delta: int) -> float:
        return self.probs.get(delta, 0.0)

    @property
    def support(self) -> list[RateDecision]:
        return [k for k, v in self.probs.items() if v > 0]

    def mode(self) -> RateDecision:
        # ties go to the move closest to zero, then the more negative one
        return max(self.probs, key=lambda d: (self.probs[d], -abs(d), -d))

    def as_dict(self) -> dict[str, float]:
        return {str(int(k)): v for k, v in self.probs.items()}


@dataclass(frozen=True)
class MeetingSnapshot:
    """Everything the agents may see for one meeting.

    ``actual`` is carried for scoring only; prompt builders never read it.
    """

    meeting_id: str
    indicators: StructuredIndicators
    beige_book: str
    dotplot_verbalized: str
    fedwatch_text: str
    actual: RateDecision

    def __post_init__(self):
        date.fromisoformat(self.meeting_id)
        object.__setattr__(self, "actual", RateDecision(self.actual))

    @property
    def meeting_date(self) -> date:
        return date.fromisoformat(self.meeting_id)


@dataclass(frozen=True)
class PolicyOption:
    label: str
    delta_bps: RateDecision
    rationale: str = ""

    def __post_init__(self):
        if self.label not in OPTION_LABELS:
            raise InvalidInputError(f"unknown option label {self.label!r}")
        object.__setattr__(self, "delta_bps", RateDecision(self.delta_bps))


def validate_options(options: Sequence[PolicyOption]) -> tuple[PolicyOption, ...]:
    """Check the dovish/neutral/hawkish triple and return it in that order."""
    by_label = {o.label: o for o in options}
    if len(options) != 3 or set(by_label) != set(OPTION_LABELS):
        raise InvalidInputError("need exactly one dovish, one neutral and one hawkish option")
    ordered = tuple(by_label[label] for label in OPTION_LABELS)
    deltas = [o.delta_bps for o in ordered]
    if not deltas[0] < deltas[1] < deltas[2]:
        raise InvalidInputError(f"option deltas must increase dovish -> hawkish, got {deltas}")
    return ordered


@dataclass(frozen=True)
class Vote:
    agent_id: str
    option_label: str
    delta_bps: RateDecision
    justification: str = ""
    fallback: bool = False

    def __post_init__(self):
        if self.option_label not in OPTION_LABELS:
            raise InvalidInputError(f"unknown option label {self.option_label!r}")
        object.__setattr__(self, "delta_bps", RateDecision(self.delta_bps))

    def as_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "option_label": self.option_label,
            "delta_bps": int(self.delta_bps),
            "justification": self.justification,
            "fallback": self.fallback,
        }


@dataclass(frozen=True)
class TranscriptEntry:
    stage: str
    agent_id: str
    text: str

    def as_dict(self) -> dict:
        return {"stage": self.stage, "agent_id": self.agent_id, "text": self.text}


@dataclass(frozen=True)
class RunRecord:
    """One simulated meeting. ``error`` is set for failed runs."""

    meeting_id: str
    run_index: int
    strategy: str
    votes: tuple[Vote, ...]
    decision: RateDecision | None
    statement: str
    transcript: tuple[TranscriptEntry, ...]
    tokens_used: int
    outlook: MarketOutlook | None = None
    options: tuple[PolicyOption, ...] = ()
    error: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {self.strategy!r}")
        if self.tokens_used < 0:
            raise InvalidInputError("tokens_used must be non-negative")
        if self.error is None:
            if len(self.votes) != NUM_MEMBERS:
                raise InvalidInputError(f"expected {NUM_MEMBERS} votes, got {len(self.votes)}")
            if self.decision is None:
                raise InvalidInputError("successful run needs a decision")

    @property
    def ok(self) -> bool:
        return self.error is None

    def as_dict(self) -> dict:
        return {
            "meeting_id": self.meeting_id,
            "run_index": self.run_index,
            "strategy": self.strategy,
            "ok": self.ok,
            "error": self.error,
            "decision": None if self.decision is None else int(self.decision),
            "votes": [v.as_dict() for v in self.votes],
            "outlook": None if self.outlook is None else self.outlook.as_dict(),
            "options": [
                {"label": o.label, "delta_bps": int(o.delta_bps), "rationale": o.rationale}
                for o in self.options
            ],
            "statement": self.statement,
            "tokens_used": self.tokens_used,
            "transcript": [e.as_dict() for e in self.transcript],
        }


@dataclass(frozen=True)
class MemberProfile:
    name: str
    hawkishness: float
    regional_affiliation: str
    gender: str
    political_party: str
    focus_labor: int
    focus_inflation: int
    focus_banking: int
    focus_global: int
    tenure_years: float

    FOCUS = ("focus_labor", "focus_inflation", "focus_banking", "focus_global")

    def __post_init__(self):
        _finite("hawkishness", float(self.hawkishness))
        _finite("tenure_years", float(self.tenure_years))
        for flag in self.FOCUS:
            value = getattr(self, flag)
            if value not in (0, 1):
                raise InvalidInputError(f"{flag} must be 0 or 1, got {value!r}")
            object.__setattr__(self, flag, int(value))
        if self.tenure_years < 0:
            raise InvalidInputError("tenure_years must be non-negative")


@dataclass(frozen=True)
class Persona:
    archetype: str
    centroid: tuple[float, ...]
    prompt_block: str
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.archetype not in ARCHETYPES:
            raise InvalidInputError(f"unknown archetype {self.archetype!r}")
        object.__setattr__(self, "centroid", tuple(float(v) for v in self.centroid))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def as_dict(self) -> dict:
        return {
            "archetype": self.archetype,
            "centroid": list(self.centroid),
            "feature_names": list(self.feature_names),
            "prompt_block": self.prompt_block,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Persona":
        return cls(
            archetype=data["archetype"],
            centroid=tuple(data["centroid"]),
            prompt_block=data["prompt_block"],
            feature_names=tuple(data.get("feature_names", ())),
        )
