"""Regenerate the bundled data trees, personas and scripted fixtures.

The indicator series are an approximate reconstruction: monthly values are
linearly interpolated between hand-entered anchor readings and stamped with
typical release lags. Text blocks (Beige Book summaries, FedWatch tables,
statements) are templated from the same numbers. Good enough for replay
tests and the LR baseline; not a substitute for vintage data.

    python3 tools/build_data.py [--out src/fomcsim/data]
"""
from __future__ import annotations

import argparse
import csv
import json
from datetime import date
from pathlib import Path

from fomcsim.evaluation import MetricsInput, dump_predictions
from fomcsim.personas import build_personas, load_members, save_personas
from fomcsim.scripting import MeetingPlan, build_fixture, consensus_runs, write_fixture

ROOT = Path(__file__).resolve().parents[1]

# (reference month, value) anchors; months between anchors are interpolated.
ANCHORS = {
    "cpi_yoy": [("2016-10", 1.6), ("2017-02", 2.7), ("2017-06", 1.6), ("2017-12", 2.1), ("2018-07", 2.9),
                ("2018-12", 1.9), ("2019-06", 1.6), ("2019-10", 1.8), ("2020-05", 0.1), ("2020-12", 1.4),
                ("2021-06", 5.4), ("2021-11", 6.8), ("2022-01", 7.5), ("2022-03", 8.5), ("2022-06", 9.1),
                ("2022-12", 6.5), ("2023-06", 3.0), ("2023-09", 3.7), ("2023-12", 3.4), ("2024-06", 3.0),
                ("2024-09", 2.4), ("2024-12", 2.9)],
    "pce_yoy": [("2016-10", 1.4), ("2017-02", 2.1), ("2017-06", 1.4), ("2017-12", 1.8), ("2018-07", 2.3),
                ("2018-12", 1.8), ("2019-06", 1.4), ("2019-10", 1.4), ("2020-05", 0.5), ("2020-12", 1.3),
                ("2021-06", 4.0), ("2021-11", 5.9), ("2022-01", 6.1), ("2022-03", 6.6), ("2022-06", 6.8),
                ("2022-12", 5.3), ("2023-06", 3.2), ("2023-12", 2.6), ("2024-06", 2.5), ("2024-09", 2.1),
                ("2024-12", 2.6)],
    "inflation_expect_1y": [("2016-10", 2.4), ("2017-12", 2.7), ("2018-12", 2.8), ("2019-10", 2.4),
                            ("2020-12", 2.5), ("2021-11", 4.9), ("2022-03", 5.4), ("2022-06", 5.3),
                            ("2022-12", 4.4), ("2023-06", 3.3), ("2023-12", 3.1), ("2024-06", 3.0),
                            ("2024-12", 2.8)],
    "tb3m": [("2016-10", 0.33), ("2017-01", 0.51), ("2017-06", 1.00), ("2017-12", 1.34), ("2018-06", 1.90),
             ("2018-12", 2.37), ("2019-06", 2.22), ("2019-10", 1.65), ("2020-04", 0.14), ("2021-11", 0.05),
             ("2022-01", 0.15), ("2022-03", 0.44), ("2022-06", 1.50), ("2022-12", 4.20), ("2023-06", 5.17),
             ("2023-12", 5.37), ("2024-06", 5.24), ("2024-09", 4.72), ("2024-12", 4.31)],
    "tb6m": [("2016-10", 0.48), ("2017-01", 0.62), ("2017-06", 1.10), ("2017-12", 1.52), ("2018-06", 2.07),
             ("2018-12", 2.49), ("2019-06", 2.09), ("2019-10", 1.62), ("2020-04", 0.16), ("2021-11", 0.07),
             ("2022-01", 0.33), ("2022-03", 0.85), ("2022-06", 2.05), ("2022-12", 4.63), ("2023-06", 5.28),
             ("2023-12", 5.25), ("2024-06", 5.22), ("2024-09", 4.45), ("2024-12", 4.24)],
    "m2_supply": [("2016-10", 13100), ("2017-12", 13800), ("2018-12", 14400), ("2019-06", 14700),
                  ("2019-10", 15100), ("2020-06", 18200), ("2021-11", 21400), ("2022-03", 21700),
                  ("2022-06", 21700), ("2022-12", 21400), ("2023-06", 20900), ("2023-12", 20800),
                  ("2024-06", 21000), ("2024-12", 21400)],
    "bbk_gdp": [("2016-10", 2.0), ("2017-06", 2.2), ("2018-06", 3.0), ("2018-12", 2.6), ("2019-10", 1.9),
                ("2020-04", -9.0), ("2020-12", 3.5), ("2021-11", 4.0), ("2022-03", 1.5), ("2022-12", 1.0),
                ("2023-06", 2.2), ("2023-12", 3.0), ("2024-06", 2.6), ("2024-12", 2.5)],
    "unemployment": [("2016-10", 4.8), ("2017-01", 4.7), ("2017-12", 4.1), ("2018-12", 3.9), ("2019-10", 3.6),
                     ("2020-04", 14.8), ("2020-12", 6.7), ("2021-11", 4.2), ("2022-03", 3.6),
                     ("2022-12", 3.5), ("2023-06", 3.6), ("2023-12", 3.7), ("2024-06", 4.1),
                     ("2024-09", 4.1), ("2024-12", 4.2)],
    "vix": [("2016-10", 15.0), ("2017-06", 10.5), ("2017-12", 10.2), ("2018-02", 19.0), ("2018-06", 13.0),
            ("2018-10", 19.0), ("2018-12", 25.0), ("2019-06", 15.5), ("2019-10", 15.0), ("2020-03", 57.0),
            ("2020-12", 22.0), ("2021-11", 19.0), ("2022-03", 25.0), ("2022-12", 21.0), ("2023-03", 20.0),
            ("2023-06", 13.5), ("2023-10", 18.0), ("2023-12", 12.5), ("2024-06", 12.5), ("2024-08", 19.0),
            ("2024-12", 15.0)],
}

# Typical day of the following month on which a month's reading is public.
RELEASE_DAY = {"cpi_yoy": 13, "pce_yoy": 28, "inflation_expect_1y": 1, "tb3m": 1, "tb6m": 1,
               "m2_supply": 25, "bbk_gdp": 5, "unemployment": 5, "vix": 1}

FORMAT = {"m2_supply": "{:.0f}"}

# Every scheduled or emergency decision in the covered windows: (date, change in bps).
DECISIONS = [
    ("2016-12-14", 25), ("2017-02-01", 0), ("2017-03-15", 25), ("2017-05-03", 0), ("2017-06-14", 25),
    ("2017-07-26", 0), ("2017-09-20", 0), ("2017-11-01", 0), ("2017-12-13", 25),
    ("2018-01-31", 0), ("2018-03-21", 25), ("2018-05-02", 0), ("2018-06-13", 25), ("2018-08-01", 0),
    ("2018-09-26", 25), ("2018-11-08", 0), ("2018-12-19", 25),
    ("2019-01-30", 0), ("2019-03-20", 0), ("2019-05-01", 0), ("2019-06-19", 0), ("2019-07-31", -25),
    ("2019-09-18", -25), ("2019-10-30", -25), ("2019-12-11", 0), ("2020-01-29", 0), ("2020-03-03", -50),
    ("2020-03-15", -100), ("2020-04-29", 0), ("2020-06-10", 0), ("2020-07-29", 0), ("2020-09-16", 0),
    ("2020-11-05", 0), ("2020-12-16", 0), ("2021-01-27", 0), ("2021-03-17", 0), ("2021-04-28", 0),
    ("2021-06-16", 0), ("2021-07-28", 0), ("2021-09-22", 0), ("2021-11-03", 0), ("2021-12-15", 0),
    ("2022-01-26", 0), ("2022-03-16", 25), ("2022-05-04", 50), ("2022-06-15", 75), ("2022-07-27", 75),
    ("2022-09-21", 75), ("2022-11-02", 75), ("2022-12-14", 50),
    ("2023-02-01", 25), ("2023-03-22", 25), ("2023-05-03", 25), ("2023-06-14", 0), ("2023-07-26", 25),
    ("2023-09-20", 0), ("2023-11-01", 0), ("2023-12-13", 0), ("2024-01-31", 0), ("2024-03-20", 0),
    ("2024-05-01", 0), ("2024-06-12", 0), ("2024-07-31", 0), ("2024-09-18", -50), ("2024-11-07", -25),
    ("2024-12-18", -25),
]
START_MIDPOINT = 0.375  # 0.25-0.50% before the December 2016 hike

BACKTEST_2023_2024 = [m for m, _ in DECISIONS if m.startswith(("2023", "2024"))]
BACKTEST_2018 = [m for m, _ in DECISIONS if m.startswith("2018")]
WARMUP = ["2019-10-30", "2022-01-26", "2022-03-16"]

# Market-implied probabilities two days before each meeting (bps -> prob).
MARKET = {
    "2018-01-31": {0: 0.97, 25: 0.03}, "2018-03-21": {0: 0.06, 25: 0.94}, "2018-05-02": {0: 0.95, 25: 0.05},
    "2018-06-13": {0: 0.08, 25: 0.92}, "2018-08-01": {0: 0.97, 25: 0.03}, "2018-09-26": {0: 0.06, 25: 0.94},
    "2018-11-08": {0: 0.92, 25: 0.08}, "2018-12-19": {0: 0.22, 25: 0.78},
    "2019-10-30": {-25: 0.90, 0: 0.10}, "2022-01-26": {0: 0.93, 25: 0.07}, "2022-03-16": {25: 0.95, 50: 0.05},
    "2023-02-01": {0: 0.02, 25: 0.98}, "2023-03-22": {0: 0.15, 25: 0.85}, "2023-05-03": {0: 0.10, 25: 0.90},
    "2023-06-14": {0: 0.75, 25: 0.25}, "2023-07-26": {0: 0.02, 25: 0.98}, "2023-09-20": {0: 0.99, 25: 0.01},
    "2023-11-01": {0: 0.98, 25: 0.02}, "2023-12-13": {0: 0.98, 25: 0.02}, "2024-01-31": {-25: 0.03, 0: 0.97},
    "2024-03-20": {-25: 0.01, 0: 0.99}, "2024-05-01": {-25: 0.03, 0: 0.97}, "2024-06-12": {-25: 0.01, 0: 0.99},
    "2024-07-31": {-25: 0.04, 0: 0.96}, "2024-09-18": {-50: 0.63, -25: 0.37}, "2024-11-07": {-25: 0.98, 0: 0.02},
    "2024-12-18": {-25: 0.95, 0: 0.05},
}

# Dot-plot medians (year-end midpoint) from the latest projections published before each meeting.
DOT_MEDIANS = {
    ("2018-01-31", "2018-03-21"): {2018: 2.125, 2019: 2.625, 2020: 3.125},
    ("2018-05-02", "2018-06-13"): {2018: 2.125, 2019: 2.875, 2020: 3.375},
    ("2018-08-01", "2018-09-26"): {2018: 2.375, 2019: 3.125, 2020: 3.375},
    ("2018-11-08", "2018-12-19"): {2018: 2.375, 2019: 3.125, 2020: 3.375},
    ("2019-10-30",): {2019: 1.875, 2020: 1.875, 2021: 2.125},
    ("2022-01-26", "2022-03-16"): {2022: 0.875, 2023: 1.625, 2024: 2.125},
    ("2023-02-01", "2023-03-22"): {2023: 5.125, 2024: 4.125, 2025: 3.125},
    ("2023-05-03", "2023-06-14"): {2023: 5.125, 2024: 4.375, 2025: 3.125},
    ("2023-07-26", "2023-09-20"): {2023: 5.625, 2024: 4.625, 2025: 3.375},
    ("2023-11-01", "2023-12-13"): {2023: 5.625, 2024: 5.125, 2025: 3.875},
    ("2024-01-31", "2024-03-20"): {2024: 4.625, 2025: 3.625, 2026: 2.875},
    ("2024-05-01", "2024-06-12"): {2024: 4.625, 2025: 3.875, 2026: 3.125},
    ("2024-07-31", "2024-09-18"): {2024: 5.125, 2025: 4.125, 2026: 3.125},
    ("2024-11-07", "2024-12-18"): {2024: 4.375, 2025: 3.375, 2026: 2.875},
}
DOT_SPREAD = (2, 4, 7, 4, 2)


def month_range(start: str, end: str):
    y, m = map(int, start.split("-"))
    ey, em = map(int, end.split("-"))
    while (y, m) <= (ey, em):
        yield y, m
        y, m = (y + 1, 1) if m == 12 else (y, m + 1)


def interpolate(anchors, year: int, month: int) -> float:
    idx = year * 12 + month
    points = [(int(k[:4]) * 12 + int(k[5:]), v) for k, v in anchors]
    if idx <= points[0][0]:
        return points[0][1]
    for (i0, v0), (i1, v1) in zip(points, points[1:]):
        if i0 <= idx <= i1:
            return v0 + (v1 - v0) * (idx - i0) / (i1 - i0)
    return points[-1][1]


def release_date(year: int, month: int, day: int) -> date:
    y, m = (year + 1, 1) if month == 12 else (year, month + 1)
    return date(y, m, day)


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def rate_path():
    """(date, midpoint after decision, change) for every decision."""
    mid, out = START_MIDPOINT, []
    for d, change in DECISIONS:
        mid += change / 100
        out.append((d, round(mid, 3), change))
    return out


def midpoint_before(meeting_id: str) -> float:
    mid = START_MIDPOINT
    for d, after, _ in rate_path():
        if d >= meeting_id:
            break
        mid = after
    return mid


def write_indicators(root: Path, first: str, last: str) -> None:
    ind = root / "indicators"
    for name, anchors in ANCHORS.items():
        fmt = FORMAT.get(name, "{:.2f}")
        rows = [(release_date(y, m, RELEASE_DAY[name]).isoformat(), fmt.format(interpolate(anchors, y, m)))
                for y, m in month_range(first, last)]
        write_csv(ind / f"{name}.csv", ("availability_date", "value"), rows)
    write_csv(ind / "fed_chair.csv", ("availability_date", "value"),
              [("2014-02-03", "Yellen"), ("2018-02-05", "Powell")])
    write_csv(ind / "white_house_party.csv", ("availability_date", "value"),
              [("2009-01-20", "Democratic"), ("2017-01-20", "Republican"), ("2021-01-20", "Democratic")])
    path = rate_path()
    write_csv(ind / "prev_fftr.csv", ("availability_date", "value"),
              [("2016-01-01", f"{START_MIDPOINT:.3f}")] + [(d, f"{mid:.3f}") for d, mid, _ in path])
    write_csv(ind / "prev_change_bps.csv", ("availability_date", "value"),
              [("2016-01-01", "25")] + [(d, str(c)) for d, _, c in path])


def dotplot_for(meeting_id: str) -> dict:
    medians = next(v for k, v in DOT_MEDIANS.items() if meeting_id in k)
    out = {}
    for year, median in medians.items():
        buckets: dict[str, int] = {}
        for offset, count in zip(range(-2, 3), DOT_SPREAD):
            mid = max(0.125, median + 0.25 * offset)
            label = f"{mid - 0.125:.2f}-{mid + 0.125:.2f}%"
            buckets[label] = buckets.get(label, 0) + count
        out[str(year)] = buckets
    return {"year_buckets": out}


def _describe_range(mid: float) -> str:
    return f"{mid - 0.125:.2f} to {mid + 0.125:.2f} percent"


def fedwatch_text(meeting_id: str) -> str:
    before = midpoint_before(meeting_id)
    lines = [f"CME FedWatch target-rate probabilities for the {meeting_id} FOMC meeting "
             f"(current target range {_describe_range(before)}):"]
    for delta, p in sorted(MARKET[meeting_id].items()):
        mid = before + delta / 100
        label = f"{mid - 0.125:.2f}-{mid + 0.125:.2f}%"
        tag = "no change" if delta == 0 else (f"{abs(delta)} bp {'hike' if delta > 0 else 'cut'}")
        lines.append(f"  {label}: {p * 100:.1f}% ({tag})")
    return "\n".join(lines) + "\n"


def _values_at(tree_root: Path, meeting_id: str):
    from fomcsim.ingest import align_indicators, load_series_set
    return align_indicators(load_series_set(tree_root / "indicators"), date.fromisoformat(meeting_id))


def beige_book_text(meeting_id: str, ind) -> str:
    growth = ("expanded at a moderate pace" if ind.bbk_gdp >= 2.5 else
              "expanded slightly" if ind.bbk_gdp >= 1.0 else "was little changed")
    labor = ("remained tight, with widespread reports of hiring difficulties" if ind.unemployment < 3.9 else
             "grew modestly as labor supply improved" if ind.unemployment < 4.5 else
             "was flat to down in most Districts")
    prices = ("rose at an elevated pace, though several Districts noted some moderation" if ind.cpi_yoy >= 4 else
              "increased moderately" if ind.cpi_yoy >= 2.5 else "rose slightly")
    outlook = ("Contacts expected growth to slow over the coming months amid tighter credit conditions."
               if ind.prev_fftr >= 4 else
               "Contacts generally expected activity to continue at a similar pace.")
    return (
        f"Summary of commentary on current economic conditions by Federal Reserve District, "
        f"prepared ahead of the {meeting_id} meeting.\n\n"
        f"Overall Economic Activity: Economic activity {growth} since the previous report. "
        f"Consumer spending was mixed, and manufacturing reports varied across Districts. {outlook}\n\n"
        f"Labor Markets: Employment {labor}. Wage growth was reported as moderate to robust.\n\n"
        f"Prices: Prices {prices}. Input costs for manufacturers and builders remained a concern "
        f"in several Districts.\n"
    )


def statement(meeting_id: str, ind, change: int, after: float) -> str:
    if change == 0:
        action = f"maintain the target range for the federal funds rate at {_describe_range(after)}"
    elif change > 0:
        action = f"raise the target range for the federal funds rate to {_describe_range(after)}"
    else:
        action = f"lower the target range for the federal funds rate to {_describe_range(after)}"
    pace = "solid" if ind.bbk_gdp >= 2 else "modest"
    infl = ("remains elevated" if ind.pce_yoy >= 3 else
            "has eased but remains somewhat elevated" if ind.pce_yoy >= 2.2 else
            "is running close to 2 percent")
    guide = {1: "In determining the extent of additional policy firming that may be appropriate, the Committee "
                "will take into account the cumulative tightening of monetary policy.",
             0: "The Committee will carefully assess incoming data, the evolving outlook, and the balance of risks.",
             -1: "In considering additional adjustments to the target range, the Committee will carefully assess "
                 "incoming data, the evolving outlook, and the balance of risks."}[(change > 0) - (change < 0)]
    return (
        f"Recent indicators suggest that economic activity has been expanding at a {pace} pace. "
        f"The unemployment rate stands at {ind.unemployment:.1f} percent. Inflation {infl}.\n\n"
        f"The Committee seeks to achieve maximum employment and inflation at the rate of 2 percent over the "
        f"longer run. In support of its goals, the Committee decided to {action}. {guide}\n"
    )


def write_tree(root: Path, meetings, first_month: str, last_month: str, warmup=()) -> None:
    write_indicators(root, first_month, last_month)
    changes = dict(DECISIONS)
    afters = {d: mid for d, mid, _ in rate_path()}
    write_csv(root / "calendar.csv", ("meeting_id", "actual_delta_bps"), [(m, changes[m]) for m in meetings])
    if warmup:
        write_csv(root / "warmup_calendar.csv", ("meeting_id", "actual_delta_bps"),
                  [(m, changes[m]) for m in warmup])
    for m in list(warmup) + list(meetings):
        d = root / m
        d.mkdir(parents=True, exist_ok=True)
        ind = _values_at(root, m)
        (d / "beige_book.txt").write_text(beige_book_text(m, ind), encoding="utf-8")
        (d / "fedwatch.txt").write_text(fedwatch_text(m), encoding="utf-8")
        (d / "dotplot.json").write_text(json.dumps(dotplot_for(m), indent=2) + "\n", encoding="utf-8")
        (d / "statement.txt").write_text(statement(m, ind, changes[m], afters[m]), encoding="utf-8")


MEMBERS = [
    # name, hawkishness, region, gender, party, labor, inflation, banking, global, tenure
    ("Jerome Powell", 3.0, "Board", "M", "Republican", 1, 1, 0, 0, 11),
    ("Philip Jefferson", 2.5, "Board", "M", "Democratic", 1, 1, 0, 0, 2),
    ("Michael Barr", 2.5, "Board", "M", "Democratic", 0, 0, 1, 0, 2),
    ("Michelle Bowman", 4.0, "Board", "F", "Republican", 0, 1, 1, 0, 6),
    ("Lisa Cook", 2.5, "Board", "F", "Democratic", 1, 0, 0, 1, 2),
    ("Adriana Kugler", 2.5, "Board", "F", "Democratic", 1, 0, 0, 1, 1),
    ("Christopher Waller", 3.5, "Board", "M", "Republican", 0, 1, 0, 0, 5),
    ("John Williams", 3.0, "New York", "M", "Unaffiliated", 1, 1, 0, 1, 13),
    ("Thomas Barkin", 3.0, "Richmond", "M", "Unaffiliated", 1, 1, 0, 0, 6),
    ("Raphael Bostic", 2.5, "Atlanta", "M", "Unaffiliated", 1, 0, 0, 0, 7),
    ("Susan Collins", 3.0, "Boston", "F", "Unaffiliated", 1, 1, 0, 0, 2),
    ("Austan Goolsbee", 2.0, "Chicago", "M", "Unaffiliated", 1, 0, 0, 0, 2),
    ("Loretta Mester", 4.0, "Cleveland", "F", "Unaffiliated", 0, 1, 1, 0, 10),
    ("Patrick Harker", 3.0, "Philadelphia", "M", "Unaffiliated", 1, 1, 0, 0, 9),
    ("Neel Kashkari", 4.0, "Minneapolis", "M", "Unaffiliated", 0, 1, 1, 0, 9),
    ("Lorie Logan", 4.0, "Dallas", "F", "Unaffiliated", 0, 1, 1, 0, 2),
    ("James Bullard", 4.5, "St. Louis", "M", "Unaffiliated", 0, 1, 0, 0, 15),
    ("Jeffrey Schmid", 3.5, "Kansas City", "M", "Unaffiliated", 0, 1, 1, 0, 1),
    ("Mary Daly", 2.5, "San Francisco", "F", "Unaffiliated", 1, 0, 0, 1, 6),
]


def write_members(path: Path) -> None:
    write_csv(path, ("name", "hawkishness", "regional_affiliation", "gender", "political_party", "focus_labor",
                     "focus_inflation", "focus_banking", "focus_global", "tenure_years"), MEMBERS)


def options_around(market: dict) -> tuple[int, int, int]:
    mode = max(sorted(market), key=lambda d: (market[d], -abs(d)))
    mode = max(-75, min(75, mode))
    return (mode - 25, mode, mode + 25)


def plan_for(i: int, meeting_id: str, decided: int, actual: int, runs: int, reflections: bool = False,
             deviate: bool = True) -> MeetingPlan:
    options = options_around(MARKET[meeting_id])
    label = ("dovish", "neutral", "hawkish")[options.index(decided)]
    if label == "neutral":
        other = "hawkish" if actual >= 0 and i % 2 == 0 else "dovish"
    else:
        other = "neutral"
    deviant = (i % runs, i % 3, other) if deviate and runs > 1 else None
    return MeetingPlan(meeting_id, MARKET[meeting_id], options, consensus_runs(label, runs, deviant),
                       actual=actual, reflections=reflections)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "src" / "fomcsim" / "data"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    changes = dict(DECISIONS)

    write_tree(out / "fomc_2023_2024", BACKTEST_2023_2024, "2019-01", "2024-11", warmup=WARMUP)
    write_tree(out / "fomc_2018", BACKTEST_2018, "2016-10", "2018-11")

    write_members(out / "members.csv")
    personas, result, _ = build_personas(load_members(out / "members.csv"), k=3, seed=0)
    save_personas(out / "personas.json", personas, result)

    # CoD fixture for 2023-2024: the committee tracks the realized path except in
    # September 2024, where it settles on -25 instead of -50.
    plans = []
    for i, m in enumerate(BACKTEST_2023_2024):
        decided = -25 if m == "2024-09-18" else changes[m]
        plans.append(plan_for(i, m, decided, changes[m], runs=5))
    warm = [plan_for(i, m, changes[m], changes[m], runs=1, reflections=True) for i, m in enumerate(WARMUP)]
    write_fixture(out / "fixtures" / "cod_2023_2024.json", build_fixture(plans + warm, style="cod"))
    write_fixture(out / "fixtures" / "plain_2023_2024.json", build_fixture(plans + warm, style="plain"))

    plans_2018 = [plan_for(i, m, changes[m], changes[m], runs=5) for i, m in enumerate(BACKTEST_2018)]
    write_fixture(out / "fixtures" / "cod_2018.json", build_fixture(plans_2018, style="cod"))

    # MiniFed's published 2018 calls, as a single-run predictions bundle.
    minifed = [25, 25, 0, 25, 0, 0, 0, 25]
    bundle = MetricsInput(votes=[[[p, p, p]] for p in minifed], decisions=[[p] for p in minifed],
                          actuals=[changes[m] for m in BACKTEST_2018])
    (out / "predictions_minifed_2018.json").write_text(json.dumps(dump_predictions(bundle), indent=1) + "\n",
                                                       encoding="utf-8")

    configs = out / "configs"
    configs.mkdir(parents=True, exist_ok=True)
    common = {"runs_per_meeting": 5, "seed": 7, "backend": "scripted", "concurrency_limit": 4,
              "personas": "../personas.json"}
    for name, cfg in {
        "cod_2023_2024.json": {"data_root": "../fomc_2023_2024", "strategy": "cod",
                               "fixture": "../fixtures/cod_2023_2024.json"},
        "baseline_2023_2024.json": {"data_root": "../fomc_2023_2024", "strategy": "baseline",
                                    "fixture": "../fixtures/plain_2023_2024.json"},
        "icl_2023_2024.json": {"data_root": "../fomc_2023_2024", "strategy": "icl",
                               "fixture": "../fixtures/plain_2023_2024.json",
                               "warmup_meetings": WARMUP},
        "cod_2018.json": {"data_root": "../fomc_2018", "strategy": "cod", "fixture": "../fixtures/cod_2018.json"},
    }.items():
        (configs / name).write_text(json.dumps({**common, **cfg}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote data under {out}")


if __name__ == "__main__":
    main()
