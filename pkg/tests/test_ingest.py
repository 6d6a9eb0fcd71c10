import json
import logging
import random
from datetime import date

import pytest

from fomcsim.backtest import bundled_path
from fomcsim.ingest import (CalendarError, DataError, DataTree, DotPlot, IndicatorSeries, MissingDataError,
                            align_indicator, load_calendar, load_dotplot, parse_verbalized_dotplot,
                            verbalize_dotplot)


def test_dotplot_example_line_exact():
    assert verbalize_dotplot({2021: {"0.00-0.25%": 18}}) == "Year 2021: 0.00-0.25%: 18 members"


def test_dotplot_ordering():
    dp = DotPlot({2024: {"4.50-4.75%": 3, "4.25-4.50%": 2}, 2023: {"5.00-5.25%": 19}})
    assert verbalize_dotplot(dp).splitlines() == [
        "Year 2023: 5.00-5.25%: 19 members",
        "Year 2024: 4.25-4.50%: 2 members",
        "Year 2024: 4.50-4.75%: 3 members",
    ]


def test_dotplot_roundtrip_random():
    rng = random.Random(3)
    for _ in range(200):
        dp = {}
        for year in rng.sample(range(2015, 2030), rng.randint(1, 4)):
            lows = rng.sample(range(0, 24), rng.randint(1, 6))
            dp[year] = {f"{lo * 0.25:.2f}-{lo * 0.25 + 0.25:.2f}%": rng.randint(1, 19) for lo in lows}
        assert parse_verbalized_dotplot(verbalize_dotplot(dp)) == dp


@pytest.mark.parametrize("count", [0, -1, 1.5, True])
def test_dotplot_rejects_bad_counts(count):
    with pytest.raises(DataError):
        verbalize_dotplot({2023: {"5.00-5.25%": count}})


def test_load_dotplot_reports_position(tmp_path):
    p = tmp_path / "dotplot.json"
    p.write_text('{"year_buckets": {"2023": {"5.00-5.25%": 3,}}}')
    with pytest.raises(DataError, match=r"dotplot.json:1:\d+"):
        load_dotplot(p)


def test_align_two_day_cutoff():
    s = IndicatorSeries("cpi_yoy", ((date(2023, 1, 12), 6.5), (date(2023, 1, 30), 6.4), (date(2023, 1, 31), 6.3)))
    # meeting 2023-02-01: cutoff 2023-01-30 is inclusive
    assert align_indicator(s, "2023-02-01") == 6.4
    assert align_indicator(s, "2023-02-02") == 6.3
    with pytest.raises(MissingDataError, match="cpi_yoy.*2023-01-05"):
        align_indicator(s, "2023-01-05")


def test_series_must_increase():
    with pytest.raises(DataError):
        IndicatorSeries("vix", ((date(2023, 1, 2), 1.0), (date(2023, 1, 2), 2.0)))


def test_calendar_errors(tmp_path):
    p = tmp_path / "calendar.csv"
    p.write_text("meeting_id,actual_delta_bps\n")
    with pytest.raises(CalendarError, match="empty"):
        load_calendar(p)
    p.write_text("meeting_id,actual_delta_bps\n2023-02-01,25\n2023-03-22,10\n")
    with pytest.raises(CalendarError, match=":3:"):
        load_calendar(p)


def test_bundled_calendar_distribution():
    cal = load_calendar(bundled_path("fomc_2023_2024", "calendar.csv"))
    assert len(cal) == 16
    assert cal.distribution() == {"hikes": 0.25, "cuts": 0.1875, "holds": 0.5625}


def test_snapshot_uses_only_pre_meeting_rate():
    tree = DataTree(bundled_path("fomc_2023_2024"))
    snap = tree.snapshot("2023-07-26")
    assert snap.indicators.prev_fftr == 5.125
    assert snap.indicators.prev_change_bps == 0
    assert snap.actual == 25
    assert snap.dotplot_verbalized.startswith("Year 2023:")


def test_missing_text_becomes_empty(tmp_path, caplog):
    import shutil
    root = tmp_path / "tree"
    shutil.copytree(bundled_path("fomc_2018"), root)
    (root / "2018-03-21" / "beige_book.txt").unlink()
    with caplog.at_level(logging.WARNING):
        snap = DataTree(root).snapshot("2018-03-21")
    assert snap.beige_book == ""
    assert "beige_book.txt" in caplog.text
