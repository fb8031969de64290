"""Shared builders for small test fixtures."""

from __future__ import annotations

import datetime as dt
import json

import numpy as np
import pandas as pd

from emopanel.emotions import EMOTIONS

ET = dt.timezone(dt.timedelta(hours=-5))  # Eastern standard time, fixed offset for winter fixtures


def random_panel(rng: np.random.Generator, n_firms: int, n_dates: int, k: int, missing: float = 0.0,
                 n_industries: int = 4) -> pd.DataFrame:
    """Unbalanced firm-date panel with firm and date effects, k regressors x0..x{k-1} and outcome y."""
    firms = np.repeat(np.arange(n_firms), n_dates)
    dates = np.tile(np.arange(n_dates), n_firms)
    x = rng.normal(size=(firms.size, k)) + rng.normal(size=n_firms)[firms, None]
    beta = rng.normal(size=k)
    y = x @ beta + rng.normal(size=n_firms)[firms] + rng.normal(size=n_dates)[dates] + rng.normal(size=firms.size)
    frame = pd.DataFrame(x, columns=[f"x{j}" for j in range(k)])
    frame["y"] = y
    frame["ticker"] = [f"F{i:02d}" for i in firms]
    frame["date"] = pd.Timestamp("2020-01-01") + pd.to_timedelta(dates, unit="D")
    frame["ff12"] = firms % n_industries + 1
    if missing:
        cols = [f"x{j}" for j in range(k)] + ["y"]
        holes = rng.random((len(frame), len(cols))) < missing / len(cols)
        frame[cols] = frame[cols].mask(holes)
    return frame


def record(i: int, user: str = "u1", ts: str = "2021-03-02T08:00:00-05:00", tags=("AAA",),
           body: str | None = None, followers: int = 10, emotion=None, **extra) -> dict:
    """One well-formed message record in the external line format."""
    rec = {
        "id": str(i), "user_id": user, "timestamp": ts, "body": body if body is not None else f"note {i}",
        "cashtags": list(tags), "follower_count": followers,
        "emotion": list(emotion) if emotion is not None else [1.0] + [0.0] * (len(EMOTIONS) - 1),
    }
    rec.update(extra)
    return rec


def lines(records) -> list[str]:
    return [json.dumps(r) for r in records]


def security_master(rows) -> pd.DataFrame:
    """rows: (ticker, secstat, tpci, exchg)."""
    return pd.DataFrame([{"ticker": t, "secstat": s, "tpci": p, "exchg": e, "sic": 3571} for t, s, p, e in rows])


FUNNEL_CALENDAR = ["2021-01-04", "2021-01-05"]


def funnel_fixture() -> tuple[list[str], pd.DataFrame, dict[str, int]]:
    """40 handcrafted messages plus a 101-post bot cluster, with the funnel counts worked out by hand.

    AAA and BBB are active US common shares; CCC is inactive.
    """
    recs, i = [], 0

    def add(n, **kw):
        nonlocal i
        for _ in range(n):
            recs.append(record(i, user=f"u{i}", **kw))
            i += 1

    add(2, tags=("AAA", "BBB"), ts="2021-01-05T08:00:00-05:00")  # multi-ticker
    add(12, tags=("AAA",), ts="2021-01-05T07:00:00-05:00")  # AAA pre-market: 12 organic posts
    add(12, tags=("BBB",), ts="2021-01-05T11:00:00-05:00")  # BBB market session: 12
    add(5, tags=("CCC",), ts="2021-01-05T07:30:00-05:00")  # inactive ticker
    add(9, tags=("AAA",), ts="2021-01-05T13:00:00-05:00")  # AAA market session: only 9
    assert len(recs) == 40
    # one user repeats the same cleaned text 101 times; case, punctuation, cashtags and links vary
    variants = ["Buy NOW!!!", "buy now", "$AAA buy   now http://spam.example", "BUY now."]
    for k in range(101):
        recs.append(record(i, user="bot", tags=("AAA",), ts="2021-01-05T06:00:00-05:00", body=variants[k % 4]))
        i += 1
    master = security_master([("AAA", "A", "0", 11), ("BBB", "A", "0", 14), ("CCC", "I", "0", 11)])
    expected = {
        "raw": 141,
        "single_ticker": 141 - 2,
        "not_automated": 139 - 101,
        "security_master": 38 - 5,
        "min_session_messages": 33 - 9,
    }
    return lines(recs), master, expected
