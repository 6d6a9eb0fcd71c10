"""Command-line entry point: ``fomcsim <subcommand> ...``.

Exit codes: 0 success, 1 validation or usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .backtest import (BacktestConfig, ConfigError, bundled_path, emit_report, make_backend,
                       predictions_from_report, resolve_personas, run_backtest)
from .core import STRATEGIES, FomcSimError
from .deliberation import CommitteeSettings, MemoryStore, run_meeting
from .evaluation import compute_metrics, load_predictions
from .gateway import GatewayError
from .ingest import DataError, DataTree
from .personas import build_personas, load_members, name_archetypes, save_personas

logger = logging.getLogger("fomcsim")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def cmd_ingest(args) -> int:
    tree = DataTree(args.data_root, args.calendar)
    snapshots = tree.snapshots()
    dist = tree.calendar.distribution()
    print(f"calendar: {len(snapshots)} meetings "
          f"({snapshots[0].meeting_id} .. {snapshots[-1].meeting_id})")
    print("distribution: " + ", ".join(f"{k} {v:.2%}" for k, v in dist.items()))
    missing = [m for m in tree.calendar.meeting_ids if tree.actual_statement(m) is None]
    if missing:
        print(f"no statement.txt for {len(missing)} meetings (similarity will be skipped)")
    print("data tree OK")
    return EXIT_OK


def cmd_cluster(args) -> int:
    profiles = load_members(args.members)
    personas, result, encoder = build_personas(profiles, k=args.k, seed=args.seed)
    save_personas(args.out, personas, result)
    labels = name_archetypes(result.centroids, encoder)
    print(f"inertia {result.inertia:.6g}")
    for persona in personas:
        members = [n for n, c in result.assignment_map().items() if labels[c] == persona.archetype]
        print(f"{persona.archetype}: {', '.join(members)}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    fixture = args.fixture
    if args.backend == "scripted" and fixture is None:
        raise ConfigError("scripted backend requires --fixture")
    config = BacktestConfig(
        data_root=Path(args.data_root), strategy=args.strategy, runs_per_meeting=args.runs,
        seed=args.seed, backend=args.backend, fixture=Path(fixture) if fixture else None,
        personas=Path(args.personas) if args.personas else None,
    )
    tree = DataTree(args.data_root, args.calendar)
    snapshot = tree.snapshot(args.meeting)
    backend = make_backend(config)
    personas = resolve_personas(config)
    store = None
    if args.strategy == "icl":
        if args.memory is None:
            logger.warning("icl strategy without --memory: members see no reflections")
            store = MemoryStore()
        else:
            store = MemoryStore.load(args.memory)
        store.freeze()
    settings = CommitteeSettings(seed=args.seed)
    failed = 0
    for j in range(args.runs):
        record = run_meeting(snapshot, personas, args.strategy, j, store, backend, settings)
        if record.ok:
            votes = " ".join(f"{int(v.delta_bps):+d}" for v in record.votes)
            print(f"run {j}: decision {int(record.decision):+d} bps (votes {votes}), tokens {record.tokens_used}")
        else:
            failed += 1
            print(f"run {j}: FAILED ({record.error})")
        if args.out:
            out = Path(args.out) / args.meeting / args.strategy / f"run{j}.json"
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(record.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"actual: {int(snapshot.actual):+d} bps")
    return EXIT_RUNTIME if failed == args.runs else EXIT_OK


def cmd_backtest(args) -> int:
    config = BacktestConfig.from_file(args.config)
    report = run_backtest(config)
    emit_report(report, args.out)
    m = report.metrics
    if m is not None:
        for key, value in m.as_dict().items():
            if value is not None:
                print(f"{key} {value:.6g}")
    if report.failed_runs:
        print(f"failed runs: {len(report.failed_runs)}")
    unevaluable = [r.meeting_id for r in report.rows if not r.evaluable]
    if unevaluable:
        print(f"WARNING: unevaluable meetings excluded: {', '.join(unevaluable)}")
    print(f"wrote {Path(args.out) / 'report.json'}")
    return EXIT_OK


def cmd_score(args) -> int:
    path = Path(args.predictions)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(raw, dict) and "report_schema_version" in raw:
        data = predictions_from_report(raw)
    else:
        data = load_predictions(path)
    report = compute_metrics(data)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    else:
        for key, value in report.as_dict().items():
            print(f"{key} {'n/a' if value is None else format(value, '.6g')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fomcsim", description="Multi-agent FOMC committee simulator and backtester.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate a data tree")
    p.add_argument("--data-root", default=str(bundled_path("fomc_2023_2024")))
    p.add_argument("--calendar", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cluster", help="cluster members.csv into personas.json")
    p.add_argument("--members", default=str(bundled_path("members.csv")))
    p.add_argument("--out", default="personas.json")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("simulate", help="simulate one meeting")
    p.add_argument("--meeting", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="baseline")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data-root", default=str(bundled_path("fomc_2023_2024")))
    p.add_argument("--calendar", default=None)
    p.add_argument("--backend", choices=("live", "scripted"), default="scripted")
    p.add_argument("--fixture", default=None)
    p.add_argument("--personas", default=None)
    p.add_argument("--memory", default=None, help="memory.json from a warm-up (icl)")
    p.add_argument("--out", default=None, help="directory for run transcripts")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("backtest", help="run a full backtest from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="backtest_out")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("score", help="compute metrics from a predictions bundle or report.json")
    p.add_argument("--predictions", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "runs", 1) < 1:
        print("error: --runs must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except GatewayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FomcSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
