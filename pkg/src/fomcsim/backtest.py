"""Experiment orchestration: meetings x runs for one strategy, aggregation
into headline predictions, metrics, and report emission."""
from __future__ import annotations

import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .core import STRATEGIES, FomcSimError, InvalidInputError, Persona, RateDecision, RunRecord
from .deliberation import CommitteeSettings, MemoryStore, icl_warmup, run_meeting
from .evaluation import MetricsInput, MetricsReport, compute_metrics, headline_prediction
from .gateway import Backend, LiveBackend, ScriptedBackend
from .ingest import DataTree, load_calendar
from .personas import build_personas, load_members, load_personas

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
DEFAULT_WARMUP = ("2019-10-30", "2022-01-26", "2022-03-16")

# Published values, not recomputed here.
PUBLISHED_TABLE = {
    "baseline": {"total_accuracy": 0.8750, "agent_accuracy": 0.7813, "voting_stability": 0.8667,
                 "similarity": 0.7458, "avg_tokens": 75724, "mae": 0.0313},
    "icl": {"total_accuracy": 0.8750, "agent_accuracy": 0.8063, "voting_stability": 0.8854,
            "similarity": 0.7272, "avg_tokens": 81303, "mae": 0.0313},
    "cod": {"total_accuracy": 0.9375, "agent_accuracy": 0.9022, "voting_stability": 0.9333,
            "similarity": 0.7382, "avg_tokens": 60464, "mae": 0.0156},
}
PUBLISHED_DIRECTIONAL = {"cod": 1.0, "ordinal_random_forest": 0.625, "linear_regression": 0.3125}
PUBLISHED_2018 = {
    "meetings": ["2018-01-31", "2018-03-21", "2018-05-02", "2018-06-13",
                 "2018-08-01", "2018-09-26", "2018-11-08", "2018-12-19"],
    "actual": [0, 25, 0, 25, 0, 25, 0, 25],
    "minifed": [25, 25, 0, 25, 0, 0, 0, 25],
    "cod": [0, 25, 0, 25, 0, 25, 0, 25],
    "accuracy": {"minifed": 0.75, "cod": 1.0},
    "mae": {"minifed": 0.0625, "cod": 0.0},
}

_METRIC_ROWS = (
    ("total_accuracy", "Total Accuracy (%)", "pct"),
    ("agent_accuracy", "Agent Accuracy (%)", "pct"),
    ("voting_stability", "Votes Stability (%)", "pct"),
    ("similarity", "Similarity (%)", "pct"),
    ("avg_tokens", "Average Tokens", "int"),
    ("mae", "MAE", "mae"),
    ("directional_accuracy", "Directional Accuracy (%)", "pct"),
)


class ConfigError(FomcSimError, ValueError):
    pass


def bundled_path(*parts: str) -> Path:
    """Path to a file shipped under ``fomcsim/data``."""
    return Path(str(resources.files("fomcsim").joinpath("data", *parts)))


@dataclass(frozen=True)
class BacktestConfig:
    """Experiment settings; see ``docs/config.md`` for the JSON schema."""

    data_root: Path
    strategy: str = "baseline"
    calendar: Path | None = None
    runs_per_meeting: int = 5
    seed: int = 0
    backend: str = "scripted"
    fixture: Path | None = None
    warmup_meetings: tuple[str, ...] = DEFAULT_WARMUP
    warmup_calendar: Path | None = None
    memory: Path | None = None
    concurrency_limit: int = 4
    personas: Path | None = None
    members: Path | None = None
    meetings: tuple[str, ...] | None = None
    exchange_rounds: int = 1
    temperature: float = 0.7
    max_output_tokens: int = 1024
    memory_limit: int = 5
    model: str | None = None
    api_base: str | None = None
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.backend not in ("live", "scripted"):
            raise ConfigError(f"backend must be 'live' or 'scripted', got {self.backend!r}")
        if self.backend == "scripted" and self.fixture is None:
            raise ConfigError("scripted backend requires a fixture path")
        if self.runs_per_meeting < 1:
            raise ConfigError("runs_per_meeting must be positive")
        if self.concurrency_limit < 1:
            raise ConfigError("concurrency_limit must be positive")
        if self.exchange_rounds < 1:
            raise ConfigError("exchange_rounds must be positive")
        for m in self.warmup_meetings:
            date.fromisoformat(m)

    _PATH_FIELDS = ("data_root", "calendar", "fixture", "warmup_calendar", "memory", "personas", "members")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: Path | None = None) -> "BacktestConfig":
        known = set(cls.__dataclass_fields__) - {"raw"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "data_root" not in data:
            raise ConfigError("config needs data_root")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key in cls._PATH_FIELDS and value is not None:
                path = Path(value)
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                value = path
            elif key in ("warmup_meetings", "meetings") and value is not None:
                value = tuple(value)
            kwargs[key] = value
        try:
            return cls(raw=dict(data), **kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "BacktestConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, base_dir=path.parent)

    def echo(self) -> dict:
        if self.raw:
            return dict(sorted(self.raw.items()))
        out = {}
        for name in self.__dataclass_fields__:
            if name == "raw":
                continue
            value = getattr(self, name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[name] = value
        return out

    def settings(self) -> CommitteeSettings:
        return CommitteeSettings(
            exchange_rounds=self.exchange_rounds,
            max_output_tokens=self.max_output_tokens,
            temperature=self.temperature,
            memory_limit=self.memory_limit,
            seed=self.seed,
        )


def make_backend(config: BacktestConfig) -> Backend:
    if config.backend == "scripted":
        if config.fixture is None or not Path(config.fixture).exists():
            raise ConfigError(f"fixture {config.fixture} not found")
        return ScriptedBackend.from_file(config.fixture)
    return LiveBackend(base_url=config.api_base, model=config.model,
                       concurrency_limit=config.concurrency_limit)


def resolve_personas(config: BacktestConfig) -> list[Persona]:
    if config.personas is not None:
        return load_personas(config.personas)
    members = config.members or bundled_path("members.csv")
    personas, _, _ = build_personas(load_members(members), k=3, seed=config.seed)
    return personas


@dataclass(frozen=True)
class MeetingRow:
    meeting_id: str
    actual: int
    headline: int | None
    evaluable: bool
    decisions: tuple[int | None, ...]
    votes: tuple[tuple[int, ...] | None, ...]
    tokens: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "meeting_id": self.meeting_id,
            "actual": self.actual,
            "headline": self.headline,
            "evaluable": self.evaluable,
            "decisions": list(self.decisions),
            "votes": [None if v is None else list(v) for v in self.votes],
            "tokens": list(self.tokens),
        }


@dataclass(frozen=True)
class BacktestReport:
    config: dict
    strategy: str
    runs_per_meeting: int
    rows: tuple[MeetingRow, ...]
    failed_runs: tuple[dict, ...]
    metrics: MetricsReport | None
    records: tuple[RunRecord, ...] = field(default=(), compare=False, repr=False)
    predicted_statements: tuple[str, ...] | None = None
    actual_statements: tuple[str, ...] | None = None
    memory: MemoryStore | None = field(default=None, compare=False, repr=False)

    def as_dict(self) -> dict:
        return {
            "report_schema_version": REPORT_SCHEMA_VERSION,
            "config": self.config,
            "strategy": self.strategy,
            "runs_per_meeting": self.runs_per_meeting,
            "meetings": [r.as_dict() for r in self.rows],
            "failed_runs": list(self.failed_runs),
            "unevaluable_meetings": [r.meeting_id for r in self.rows if not r.evaluable],
            "metrics": None if self.metrics is None else self.metrics.as_dict(),
            "statements": None if self.predicted_statements is None else {
                "predicted": list(self.predicted_statements),
                "actual": list(self.actual_statements),
            },
            "reference": {
                "note": "published values, not recomputed",
                "multi_agent_table": PUBLISHED_TABLE,
                "directional_accuracy": PUBLISHED_DIRECTIONAL,
                "benchmark_2018": PUBLISHED_2018,
            },
        }


def aggregate(records: Sequence[RunRecord], calendar_entries: Sequence[tuple[str, RateDecision]],
              runs_per_meeting: int, strategy: str, config_echo: dict,
              actual_statements: Mapping[str, str | None] | None = None) -> BacktestReport:
    """Fold run records into per-meeting rows and compute metrics.

    A meeting with more than half of its runs failed is unevaluable and left
    out of every metric.
    """
    by_key = {(r.meeting_id, r.run_index): r for r in records}
    rows, failed = [], []
    votes, decisions, actuals, headlines, tokens = [], [], [], [], []
    pred_statements, act_statements = [], []
    for meeting_id, actual in calendar_entries:
        runs = [by_key[(meeting_id, j)] for j in range(runs_per_meeting)]
        ok = [r for r in runs if r.ok]
        for r in runs:
            if not r.ok:
                failed.append({"meeting_id": meeting_id, "run_index": r.run_index, "error": r.error})
        evaluable = len(ok) * 2 >= runs_per_meeting and bool(ok)
        headline = int(headline_prediction([r.decision for r in ok])) if evaluable else None
        if not evaluable:
            logger.warning("meeting %s unevaluable: %d of %d runs failed; excluded from metrics",
                           meeting_id, runs_per_meeting - len(ok), runs_per_meeting)
        rows.append(MeetingRow(
            meeting_id=meeting_id,
            actual=int(actual),
            headline=headline,
            evaluable=evaluable,
            decisions=tuple(int(r.decision) if r.ok else None for r in runs),
            votes=tuple(tuple(int(v.delta_bps) for v in r.votes) if r.ok else None for r in runs),
            tokens=tuple(r.tokens_used for r in runs),
        ))
        if evaluable:
            votes.append([[int(v.delta_bps) for v in r.votes] for r in ok])
            decisions.append([int(r.decision) for r in ok])
            actuals.append(int(actual))
            headlines.append(headline)
            tokens.append([r.tokens_used for r in ok])
            pred_statements.append(next(r.statement for r in ok if r.decision == headline))
            act_statements.append((actual_statements or {}).get(meeting_id))
    have_statements = bool(actuals) and all(s is not None for s in act_statements)
    metrics = None
    if actuals:
        metrics = compute_metrics(MetricsInput(
            votes=votes, decisions=decisions, actuals=actuals, headline=headlines,
            predicted_statements=pred_statements if have_statements else None,
            actual_statements=act_statements if have_statements else None,
            tokens=tokens,
        ))
    return BacktestReport(
        config=config_echo,
        strategy=strategy,
        runs_per_meeting=runs_per_meeting,
        rows=tuple(rows),
        failed_runs=tuple(failed),
        metrics=metrics,
        records=tuple(sorted(records, key=lambda r: (r.meeting_id, r.run_index))),
        predicted_statements=tuple(pred_statements) if have_statements else None,
        actual_statements=tuple(act_statements) if have_statements else None,
    )


def run_warmup(config: BacktestConfig, tree: DataTree, backend: Backend,
               personas: Sequence[Persona]) -> MemoryStore:
    if config.memory is not None and Path(config.memory).exists():
        return MemoryStore.load(config.memory)
    warm_calendar = load_calendar(config.warmup_calendar or tree.root / "warmup_calendar.csv")
    snapshots = [tree.snapshot(m, warm_calendar) for m in config.warmup_meetings]
    return icl_warmup(snapshots, MemoryStore(), backend, personas, config.settings())


def run_backtest(config: BacktestConfig, backend: Backend | None = None,
                 personas: Sequence[Persona] | None = None,
                 store: MemoryStore | None = None) -> BacktestReport:
    tree = DataTree(config.data_root, config.calendar)
    entries = list(tree.calendar.entries)
    if config.meetings is not None:
        wanted = set(config.meetings)
        entries = [e for e in entries if e[0] in wanted]
        missing = wanted - {m for m, _ in entries}
        if missing:
            raise ConfigError(f"meetings not in calendar: {sorted(missing)}")
    if not entries:
        raise ConfigError("no meetings to backtest")
    backend = backend or make_backend(config)
    personas = list(personas) if personas is not None else resolve_personas(config)
    if config.strategy == "icl":
        earliest = min(m for m, _ in entries)
        late = [m for m in config.warmup_meetings if m >= earliest]
        if late:
            raise ConfigError(f"warm-up meetings {late} do not precede the first backtest meeting {earliest}")
        if store is None:
            store = run_warmup(config, tree, backend, personas)
        logger.info("warm-up memory holds %d entries", len(store))
    else:
        store = None
    if store is not None:
        store.freeze()
    snapshots = {m: tree.snapshot(m) for m, _ in entries}
    settings = config.settings()
    jobs = [(m, j) for m, _ in entries for j in range(config.runs_per_meeting)]

    def work(job):
        meeting_id, run_index = job
        return run_meeting(snapshots[meeting_id], personas, config.strategy, run_index, store, backend, settings)

    with ThreadPoolExecutor(max_workers=config.concurrency_limit) as pool:
        records = list(pool.map(work, jobs))
    statements = {m: tree.actual_statement(m) for m, _ in entries}
    report = aggregate(records, entries, config.runs_per_meeting, config.strategy, config.echo(), statements)
    return dataclasses.replace(report, memory=store)


def predictions_from_report(report: Mapping) -> MetricsInput:
    """Rebuild the metric inputs from a report dict (``report.json``)."""
    votes, decisions, actuals, headline, tokens = [], [], [], [], []
    for row in report["meetings"]:
        if not row["evaluable"]:
            continue
        ok = [j for j, d in enumerate(row["decisions"]) if d is not None]
        votes.append([row["votes"][j] for j in ok])
        decisions.append([row["decisions"][j] for j in ok])
        tokens.append([row["tokens"][j] for j in ok])
        actuals.append(row["actual"])
        headline.append(row["headline"])
    statements = report.get("statements") or {}
    return MetricsInput(votes=votes, decisions=decisions, actuals=actuals, headline=headline,
                        predicted_statements=statements.get("predicted"),
                        actual_statements=statements.get("actual"), tokens=tokens)


def _fmt(value, kind: str) -> str:
    if value is None:
        return "n/a"
    if kind == "pct":
        return f"{100 * value:.2f}"
    if kind == "int":
        return f"{value:,.0f}"
    return f"{value:.4f}"


def _pct_move(bps: int | None) -> str:
    return "n/a" if bps is None else f"{bps / 100:.2f}%"


def render_markdown(report: BacktestReport) -> str:
    data = report.as_dict()
    m = data["metrics"] or {}
    n_eval = sum(r.evaluable for r in report.rows)
    lines = [
        "# Backtest report",
        "",
        f"Strategy: {report.strategy}. Runs per meeting: {report.runs_per_meeting}. "
        f"Meetings: {len(report.rows)} ({n_eval} evaluated).",
        "",
        "## Metrics",
        "",
        "| Metric | This run | Published baseline | Published ICL | Published CoD |",
        "|---|---|---|---|---|",
    ]
    for key, label, kind in _METRIC_ROWS:
        published = [PUBLISHED_TABLE[s].get(key) for s in ("baseline", "icl", "cod")]
        if key == "directional_accuracy":
            published = [None, None, PUBLISHED_DIRECTIONAL["cod"]]
        cells = [_fmt(m.get(key), kind)] + [_fmt(p, kind) for p in published]
        lines.append(f"| {label} | " + " | ".join(cells) + " |")
    lines += [
        "",
        "## Per-meeting results",
        "",
        "| Meeting Date | Actual | Predicted | Run decisions (bps) |",
        "|---|---|---|---|",
    ]
    for row in report.rows:
        runs = " ".join("fail" if d is None else (f"{d:+d}" if d else "0") for d in row.decisions)
        lines.append(f"| {row.meeting_id} | {_pct_move(row.actual)} | {_pct_move(row.headline)} | {runs} |")
    if report.failed_runs:
        lines += ["", "## Failed runs", "", "| Meeting | Run | Error |", "|---|---|---|"]
        for f in report.failed_runs:
            error = str(f["error"]).replace("|", "/").replace("\n", " ")
            lines.append(f"| {f['meeting_id']} | {f['run_index']} | {error} |")
    unevaluable = [r.meeting_id for r in report.rows if not r.evaluable]
    if unevaluable:
        lines += ["", f"**Warning:** unevaluable meetings excluded from metrics: {', '.join(unevaluable)}"]
    lines += [
        "",
        "## Reference rows (published values, not recomputed)",
        "",
        f"- Directional accuracy: Ordinal RF {PUBLISHED_DIRECTIONAL['ordinal_random_forest']:.2%}, "
        f"linear regression {PUBLISHED_DIRECTIONAL['linear_regression']:.2%}, "
        f"multi-agent CoD {PUBLISHED_DIRECTIONAL['cod']:.2%}.",
        "",
        "| Meeting Date | Actual | MiniFed | Multi-agent CoD |",
        "|---|---|---|---|",
    ]
    for mid, a, mf, cod in zip(PUBLISHED_2018["meetings"], PUBLISHED_2018["actual"],
                               PUBLISHED_2018["minifed"], PUBLISHED_2018["cod"]):
        lines.append(f"| {mid} | {_pct_move(a)} | {_pct_move(mf)} | {_pct_move(cod)} |")
    lines.append(f"| Accuracy | | {PUBLISHED_2018['accuracy']['minifed']:.0%} | "
                 f"{PUBLISHED_2018['accuracy']['cod']:.0%} |")
    lines.append(f"| MAE | | {PUBLISHED_2018['mae']['minifed']:.4f} | {PUBLISHED_2018['mae']['cod']:.2f} |")
    return "\n".join(lines) + "\n"


def report_json(report: BacktestReport) -> str:
    return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"


def emit_report(report: BacktestReport, out_dir: str | Path,
                formats: Sequence[str] = ("json", "md", "runs")) -> list[Path]:
    """Write ``report.json``, ``report.md`` and per-run transcripts.

    Output depends only on report content, so equal reports give equal bytes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out_dir / "report.json"
        path.write_text(report_json(report), encoding="utf-8")
        written.append(path)
    if "md" in formats:
        path = out_dir / "report.md"
        path.write_text(render_markdown(report), encoding="utf-8")
        written.append(path)
    if "runs" in formats:
        for record in report.records:
            path = out_dir / "runs" / record.meeting_id / record.strategy / f"run{record.run_index}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(record.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
            written.append(path)
    if "runs" in formats and report.memory is not None:
        path = out_dir / "memory.json"
        report.memory.save(path)
        written.append(path)
    return written


def check_config_paths(config: BacktestConfig) -> None:
    if not Path(config.data_root).is_dir():
        raise ConfigError(f"data_root {config.data_root} is not a directory")
    for name in ("fixture", "personas", "members", "calendar"):
        value = getattr(config, name)
        if value is not None and not Path(value).exists():
            raise ConfigError(f"{name} {value} not found")


def validate_config(config: BacktestConfig) -> None:
    check_config_paths(config)
    if config.backend == "scripted" and config.fixture is None:
        raise InvalidInputError("scripted backend requires a fixture")
