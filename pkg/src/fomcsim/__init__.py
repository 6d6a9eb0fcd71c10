"""Multi-agent FOMC committee simulator with a deterministic backtesting harness."""
from .core import (ARCHETYPES, STRATEGIES, FomcSimError, InvalidInputError, MarketOutlook, MeetingSnapshot,
                   Persona, PolicyOption, RateDecision, RunRecord, StructuredIndicators, Vote, snap_to_grid)
from .ingest import DataTree, align_indicator, load_calendar, parse_verbalized_dotplot, verbalize_dotplot
from .personas import KMeans, ProfileEncoder, build_personas, kmeans, load_members, load_personas
from .gateway import ChatRequest, ChatResponse, LiveBackend, ScriptedBackend, complete
from .deliberation import MemoryStore, icl_warmup, run_meeting, tally, validate_cod
from .evaluation import (LinearBaseline, MetricsInput, MetricsReport, TfidfEmbedder, compute_metrics,
                         semantic_similarity)
from .backtest import BacktestConfig, BacktestReport, emit_report, run_backtest

__version__ = "0.1.0"

__all__ = [
    "ARCHETYPES", "STRATEGIES", "FomcSimError", "InvalidInputError", "MarketOutlook", "MeetingSnapshot",
    "Persona", "PolicyOption", "RateDecision", "RunRecord", "StructuredIndicators", "Vote", "snap_to_grid",
    "DataTree", "align_indicator", "load_calendar", "parse_verbalized_dotplot", "verbalize_dotplot",
    "KMeans", "ProfileEncoder", "build_personas", "kmeans", "load_members", "load_personas",
    "ChatRequest", "ChatResponse", "LiveBackend", "ScriptedBackend", "complete",
    "MemoryStore", "icl_warmup", "run_meeting", "tally", "validate_cod",
    "LinearBaseline", "MetricsInput", "MetricsReport", "TfidfEmbedder", "compute_metrics", "semantic_similarity",
    "BacktestConfig", "BacktestReport", "emit_report", "run_backtest",
]
