"""Trading calendar and the pre-market / market session windows.

All clock times are US Eastern. A trading date ``t`` owns two windows:

* pre-market: from 16:00 on the previous trading date (exclusive) up to,
  but not including, 09:30 on ``t``. Weekends and holidays roll into the
  next trading date's pre-market window.
* market: 09:30 through 16:00 inclusive on ``t``.

Every instant after midnight of the first calendar date and up to 16:00 of
the last calendar date falls in exactly one window.
"""

from __future__ import annotations

import datetime as dt
from enum import Enum
from pathlib import Path
from typing import Iterable
from zoneinfo import ZoneInfo

import numpy as np
import pandas as pd

EASTERN = ZoneInfo("America/New_York")


class Session(str, Enum):
    PRE_MARKET = "pre"
    MARKET = "mkt"


class TradingCalendar:
    """Sorted, duplicate-free list of trading dates."""

    def __init__(self, dates: Iterable[dt.date | str], market_open: dt.time = dt.time(9, 30),
                 market_close: dt.time = dt.time(16, 0)):
        parsed = sorted({_as_date(d) for d in dates})
        if not parsed:
            raise ValueError("trading calendar is empty")
        if market_open >= market_close:
            raise ValueError("market open must precede market close")
        self.dates: list[dt.date] = parsed
        self.market_open = market_open
        self.market_close = market_close
        self._ordinals = np.array([d.toordinal() for d in parsed], dtype=np.int64)
        self._index = {d: i for i, d in enumerate(parsed)}

    @classmethod
    def from_file(cls, path: str | Path, **kwargs) -> "TradingCalendar":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")], **kwargs)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text("".join(f"{d.isoformat()}\n" for d in self.dates), encoding="utf-8")

    def __len__(self) -> int:
        return len(self.dates)

    def __contains__(self, day: dt.date) -> bool:
        return day in self._index

    def position(self, day: dt.date) -> int:
        return self._index[day]

    def shift(self, day: dt.date, k: int) -> dt.date | None:
        """Trading date `k` positions after `day` (negative looks back); ``None`` off the ends."""
        i = self._index[day] + k
        if 0 <= i < len(self.dates):
            return self.dates[i]
        return None

    def next_on_or_after(self, day: dt.date) -> dt.date | None:
        i = int(np.searchsorted(self._ordinals, day.toordinal(), side="left"))
        return self.dates[i] if i < len(self.dates) else None

    def next_after(self, day: dt.date) -> dt.date | None:
        i = int(np.searchsorted(self._ordinals, day.toordinal(), side="right"))
        return self.dates[i] if i < len(self.dates) else None

    def session_bounds(self, day: dt.date, session: Session) -> tuple[dt.datetime, dt.datetime]:
        """Eastern-time (start, end) of a window; pre-market is (start, end), market is [start, end]."""
        if session is Session.MARKET:
            return (dt.datetime.combine(day, self.market_open, EASTERN),
                    dt.datetime.combine(day, self.market_close, EASTERN))
        prev = self.shift(day, -1)
        start = (dt.datetime.combine(prev, self.market_close, EASTERN) if prev is not None
                 else dt.datetime.combine(day, dt.time(0, 0), EASTERN) - dt.timedelta(microseconds=1))
        return start, dt.datetime.combine(day, self.market_open, EASTERN)


def _as_date(value: dt.date | str) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value).strip())


def assign_session(timestamp: dt.datetime, calendar: TradingCalendar) -> tuple[dt.date, Session] | None:
    """Map one aware timestamp to its (trading date, session), or ``None`` when out of scope."""
    if timestamp.tzinfo is None:
        raise ValueError("timestamp must carry a zone offset")
    local = timestamp.astimezone(EASTERN)
    day, clock = local.date(), local.time().replace(tzinfo=None)
    if day < calendar.dates[0]:
        return None
    if day in calendar:
        if clock < calendar.market_open:
            return day, Session.PRE_MARKET
        if clock <= calendar.market_close:
            return day, Session.MARKET
    target = calendar.next_after(day)
    if target is None:
        return None
    return target, Session.PRE_MARKET


def assign_sessions(timestamps: pd.Series, calendar: TradingCalendar) -> pd.DataFrame:
    """Vectorized :func:`assign_session`.

    Returns a frame aligned with `timestamps` holding ``trading_date``
    (``datetime64``, NaT when out of scope) and ``session`` ("pre", "mkt" or
    missing).
    """
    wall = eastern_wall_clock(timestamps)
    days = wall.astype("datetime64[D]")
    ordinals = days.astype(np.int64) + dt.date(1970, 1, 1).toordinal()
    seconds = (wall - days).astype("timedelta64[ns]").astype(np.int64) / 1e9
    open_s = _seconds(calendar.market_open)
    close_s = _seconds(calendar.market_close)

    cal = calendar._ordinals
    pos = np.searchsorted(cal, ordinals, side="left")
    is_trading = (pos < len(cal)) & (cal[np.minimum(pos, len(cal) - 1)] == ordinals)
    in_market = is_trading & (seconds >= open_s) & (seconds <= close_s)
    same_day_pre = is_trading & (seconds < open_s)
    # Everything else belongs to the first trading date strictly after the local day.
    nxt = np.searchsorted(cal, ordinals, side="right")
    target = np.where(in_market | same_day_pre, pos, nxt)
    valid = (ordinals >= cal[0]) & (target < len(cal))

    target_ord = np.where(valid, cal[np.minimum(target, len(cal) - 1)], cal[0])
    trading_date = pd.to_datetime(target_ord - dt.date(1970, 1, 1).toordinal(), unit="D")
    trading_date = pd.Series(trading_date, index=timestamps.index).where(valid)
    session = np.where(in_market, Session.MARKET.value, Session.PRE_MARKET.value).astype(object)
    session[~valid] = None
    return pd.DataFrame({"trading_date": trading_date, "session": session}, index=timestamps.index)


def eastern_wall_clock(timestamps) -> np.ndarray:
    """Naive Eastern wall-clock ``datetime64[ns]`` values for UTC-convertible timestamps.

    UTC offsets only change on the hour, so the zone lookup runs once per
    distinct UTC hour rather than once per timestamp.
    """
    utc = pd.DatetimeIndex(pd.to_datetime(timestamps, utc=True)).tz_localize(None).to_numpy()
    if utc.size == 0:
        return utc
    inverse, unique_hours = pd.factorize(utc.astype("datetime64[h]").astype(np.int64))
    probe = pd.DatetimeIndex(unique_hours.astype("datetime64[h]").astype("datetime64[ns]")).tz_localize("UTC")
    offsets = (probe.tz_convert(EASTERN).tz_localize(None) - probe.tz_localize(None)).to_numpy()
    return utc + offsets[inverse]


def _seconds(t: dt.time) -> float:
    return t.hour * 3600 + t.minute * 60 + t.second + t.microsecond / 1e6
