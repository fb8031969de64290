import datetime as dt

import pandas as pd
import pytest

from emopanel.sessions import EASTERN, Session, TradingCalendar, assign_session, assign_sessions

# Jan 2021: Mon 4 .. Fri 8, Mon 11, Tue 12; Mon 18 is a holiday
DATES = ["2021-01-04", "2021-01-05", "2021-01-06", "2021-01-07", "2021-01-08", "2021-01-11", "2021-01-12",
         "2021-01-13", "2021-01-14", "2021-01-15", "2021-01-19"]


@pytest.fixture
def cal():
    return TradingCalendar(DATES)


def et(s: str) -> dt.datetime:
    return dt.datetime.fromisoformat(s).replace(tzinfo=EASTERN)


@pytest.mark.parametrize("stamp, day, session", [
    ("2021-01-05 08:15", "2021-01-05", Session.PRE_MARKET),  # Tuesday morning
    ("2021-01-04 17:30", "2021-01-05", Session.PRE_MARKET),  # Monday evening rolls forward
    ("2021-01-08 18:00", "2021-01-11", Session.PRE_MARKET),  # Friday evening rolls over the weekend
    ("2021-01-09 12:00", "2021-01-11", Session.PRE_MARKET),  # Saturday
    ("2021-01-15 20:00", "2021-01-19", Session.PRE_MARKET),  # holiday weekend
    ("2021-01-05 09:29:59", "2021-01-05", Session.PRE_MARKET),
    ("2021-01-05 09:30", "2021-01-05", Session.MARKET),
    ("2021-01-05 16:00", "2021-01-05", Session.MARKET),  # close is inclusive
    ("2021-01-05 16:00:01", "2021-01-06", Session.PRE_MARKET),
])
def test_assign_session_examples(cal, stamp, day, session):
    assert assign_session(et(stamp), cal) == (dt.date.fromisoformat(day), session)


def test_out_of_scope(cal):
    # before the first calendar date, and after the last close
    assert assign_session(et("2021-01-03 23:00"), cal) is None
    assert assign_session(et("2021-01-19 16:30"), cal) is None
    with pytest.raises(ValueError, match="zone"):
        assign_session(dt.datetime(2021, 1, 5, 8), cal)


def test_utc_input_is_converted(cal):
    # 13:15 UTC is 08:15 EST
    stamp = dt.datetime(2021, 1, 5, 13, 15, tzinfo=dt.timezone.utc)
    assert assign_session(stamp, cal) == (dt.date(2021, 1, 5), Session.PRE_MARKET)


def test_daylight_saving_boundary():
    cal = TradingCalendar(["2021-03-12", "2021-03-15"])
    # 13:45 UTC is 08:45 EST on Friday but 09:45 EDT on Monday
    fri = dt.datetime(2021, 3, 12, 13, 45, tzinfo=dt.timezone.utc)
    mon = dt.datetime(2021, 3, 15, 13, 45, tzinfo=dt.timezone.utc)
    assert assign_session(fri, cal)[1] is Session.PRE_MARKET
    assert assign_session(mon, cal)[1] is Session.MARKET


def test_vectorized_matches_scalar(cal):
    # every 7 minutes across the calendar, including both DST-free edges
    stamps = pd.Series(pd.date_range("2021-01-03 20:00", "2021-01-20 02:00", freq="7min", tz=EASTERN))
    frame = assign_sessions(stamps, cal)
    for ts, (day, sess) in zip(stamps, frame.itertuples(index=False)):
        expected = assign_session(ts.to_pydatetime(), cal)
        if expected is None:
            assert pd.isna(day) and sess is None
        else:
            assert (day.date(), sess) == (expected[0], expected[1].value)


def test_calendar_navigation(cal):
    d = dt.date.fromisoformat
    assert cal.shift(d("2021-01-08"), 1) == d("2021-01-11")
    assert cal.shift(d("2021-01-04"), -1) is None
    assert cal.next_after(d("2021-01-16")) == d("2021-01-19")
    assert cal.next_on_or_after(d("2021-01-19")) == d("2021-01-19")
    start, end = cal.session_bounds(d("2021-01-11"), Session.PRE_MARKET)
    assert start == et("2021-01-08 16:00") and end == et("2021-01-11 09:30")


def test_calendar_file_round_trip(tmp_path, cal):
    path = tmp_path / "cal.txt"
    cal.to_file(path)
    assert TradingCalendar.from_file(path).dates == cal.dates


def test_calendar_validation():
    with pytest.raises(ValueError, match="empty"):
        TradingCalendar([])
    with pytest.raises(ValueError, match="precede"):
        TradingCalendar(DATES, market_open=dt.time(16), market_close=dt.time(9, 30))
