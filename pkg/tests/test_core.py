import logging

import pytest
from hypothesis import given, strategies as st

from fomcsim.core import (InvalidInputError, MarketOutlook, PolicyOption, RateDecision, RunRecord,
                          StructuredIndicators, clamp_decision, snap_to_grid, validate_options)


@pytest.mark.parametrize("bps", [-100, -75, -50, -25, 0, 25, 50, 75, 100])
def test_rate_decision_grid(bps):
    d = RateDecision(bps)
    assert d == bps and d.delta_bps == bps and d.percent == bps / 100


@pytest.mark.parametrize("bad", [10, 125, -125, 12.5, True, float("nan")])
def test_rate_decision_rejects(bad):
    with pytest.raises(InvalidInputError):
        RateDecision(bad)


def test_describe():
    assert RateDecision(0).describe() == "maintain the target range"
    assert RateDecision(-50).describe() == "lower the target range by 50 basis points"


@pytest.mark.parametrize("raw,expected", [(0.375, 50), (-0.375, -50), (0.125, 25), (0.1, 0), (0.0, 0),
                                          (0.26, 25), (-0.13, -25), (0.62, 50), (0.63, 75)])
def test_snap_to_grid(raw, expected):
    assert snap_to_grid(raw) == expected


def test_snap_clamps_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        assert snap_to_grid(1.6) == 100
        assert clamp_decision(-150) == -100
    assert "clamped" in caplog.text


@given(st.floats(min_value=-0.9, max_value=0.9, allow_nan=False))
def test_snap_is_nearest_grid_point(raw):
    d = snap_to_grid(raw)
    assert d % 25 == 0
    assert abs(d / 100 - raw) <= 0.125 + 1e-12


def test_outlook_normalizes_and_mode():
    o = MarketOutlook({0: 2.0, 25: 2.0, -25: 1.0})
    assert sum(o.probs.values()) == pytest.approx(1.0)
    assert o.mode() == 0
    assert MarketOutlook({-25: 1, 25: 1}).mode() == -25
    assert o.prob(50) == 0.0
    with pytest.raises(InvalidInputError):
        MarketOutlook({0: 0.0})
    with pytest.raises(InvalidInputError):
        MarketOutlook({0: -1.0, 25: 2.0})


def test_validate_options_orders_and_checks():
    opts = [PolicyOption("hawkish", 25), PolicyOption("dovish", -25), PolicyOption("neutral", 0)]
    assert [o.label for o in validate_options(opts)] == ["dovish", "neutral", "hawkish"]
    with pytest.raises(InvalidInputError):
        validate_options([PolicyOption("dovish", 0), PolicyOption("neutral", 0), PolicyOption("hawkish", 25)])


def _ind(**kw):
    base = dict(pce_yoy=2.5, cpi_yoy=3.0, inflation_expect_1y=3.0, tb3m=5.2, tb6m=5.3, m2_supply=20800.0,
                bbk_gdp=2.0, unemployment=3.8, vix=14.0, fed_chair="Powell", white_house_party="Democratic",
                prev_fftr=5.375, prev_change_bps=0)
    base.update(kw)
    return StructuredIndicators(**base)


def test_indicator_validation():
    assert _ind().as_dict()["fed_chair"] == "Powell"
    for bad in (dict(unemployment=120.0), dict(vix=-1.0), dict(cpi_yoy=float("inf")), dict(prev_change_bps=10)):
        with pytest.raises(InvalidInputError):
            _ind(**bad)


def test_run_record_requires_three_votes_when_ok():
    with pytest.raises(InvalidInputError):
        RunRecord("2023-02-01", 0, "cod", (), RateDecision(0), "", (), 0)
    failed = RunRecord("2023-02-01", 0, "cod", (), None, "", (), 0, error="boom")
    assert not failed.ok and failed.as_dict()["error"] == "boom"
