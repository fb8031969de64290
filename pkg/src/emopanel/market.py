"""Daily price bars, return and control variables, low-frequency as-of joins, FF-12 industries."""

from __future__ import annotations

import logging
from functools import lru_cache
from importlib import resources
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

log = logging.getLogger(__name__)

PRICE_COLUMNS = ["ticker", "date", "open", "close", "shares_outstanding", "share_volume", "sic"]
LOWFREQ_COLUMNS = ["ticker", "as_of_date", "kind", "value"]
LOWFREQ_KINDS = ("short_interest", "institutional_ownership")
CONTROL_COLUMNS = ["ret_oc", "ret_co", "ret_oc_lag1", "ret_20_1", "vol_183_1", "dvol_183_1",
                   "mcap_lag1", "log_dvol", "ff12"]

VOL_WINDOW = 183
MIN_WINDOW_OBS = 60
MOMENTUM_WINDOW = 20


@lru_cache(maxsize=1)
def ff12_table() -> pd.DataFrame:
    text = resources.files("emopanel").joinpath("data/ff12.csv").read_text(encoding="utf-8")
    return pd.read_csv(StringIO(text))


@lru_cache(maxsize=1)
def _ff12_lookup() -> np.ndarray:
    lookup = np.full(10000, 12, dtype=np.int64)
    for lo, hi, ind in ff12_table()[["sic_lo", "sic_hi", "industry"]].itertuples(index=False):
        lookup[lo:hi + 1] = ind
    return lookup


def map_ff12(sic: int) -> int:
    """Fama-French 12-industry code for a 4-digit SIC; unmatched codes fall in 12 (Other)."""
    sic = int(sic)
    if not 0 <= sic <= 9999:
        raise ValueError(f"SIC code {sic} outside [0, 9999]")
    return int(_ff12_lookup()[sic])


def map_ff12_array(sics) -> np.ndarray:
    sics = np.asarray(sics, dtype=np.int64)
    if sics.size and (sics.min() < 0 or sics.max() > 9999):
        raise ValueError("SIC codes must lie in [0, 9999]")
    return _ff12_lookup()[sics]


def validate_bars(bars: pd.DataFrame) -> tuple[pd.DataFrame, list[str]]:
    """Drop bars with non-positive prices or negative counts; return the survivors and diagnostics."""
    bad_price = ~((bars["open"] > 0) & (bars["close"] > 0))
    bad_count = (bars["shares_outstanding"] < 0) | (bars["share_volume"] < 0)
    bad = (bad_price | bad_count).to_numpy()
    diagnostics = [
        f"rejected bar {r.ticker} {pd.Timestamp(r.date).date()}: open={r.open} close={r.close}"
        for r in bars.loc[bad, ["ticker", "date", "open", "close"]].itertuples(index=False)
    ] if "ticker" in bars else [f"rejected bar at row {i}" for i in np.flatnonzero(bad)]
    for d in diagnostics:
        log.warning(d)
    return bars.loc[~bad], diagnostics


def _return_arrays(open_: np.ndarray, close: np.ndarray) -> dict[str, np.ndarray]:
    ret_oc = (close - open_) / open_
    prev_close = np.r_[np.nan, close[:-1]]
    return {
        "ret_oc": ret_oc,
        "ret_co": (open_ - prev_close) / prev_close,
        "ret_oc_lag1": np.r_[np.nan, ret_oc[:-1]],
    }


def compute_returns(bars: pd.DataFrame) -> pd.DataFrame:
    """Open-close, close-open and lagged open-close returns for one ticker's date-ordered bars."""
    bars, _ = validate_bars(bars)
    if bars["date"].duplicated().any():
        raise ValueError("duplicate dates in bars")
    if not bars["date"].is_monotonic_increasing:
        raise ValueError("bars must be sorted by date")
    arrays = _return_arrays(bars["open"].to_numpy(float), bars["close"].to_numpy(float))
    return pd.DataFrame({"date": bars["date"].to_numpy(), **arrays})


def _lagged_windows(values: np.ndarray, window: int) -> np.ndarray:
    """Row i holds values[i - window : i] (NaN-padded at the start)."""
    padded = np.r_[np.full(window, np.nan), values]
    return sliding_window_view(padded, window)[: len(values)]


def trailing_std(values: np.ndarray, window: int = VOL_WINDOW, min_obs: int = MIN_WINDOW_OBS) -> np.ndarray:
    """Sample std of the `window` values strictly before each row; NaN below `min_obs` observations."""
    w = _lagged_windows(np.asarray(values, float), window)
    n = np.sum(~np.isnan(w), axis=1)
    out = np.full(len(w), np.nan)
    full = n == window
    out[full] = w[full].std(axis=1, ddof=1)
    part = ~full & (n >= max(min_obs, 2))
    if part.any():
        out[part] = np.nanstd(w[part], axis=1, ddof=1)
    return out


def trailing_mean(values: np.ndarray, window: int = VOL_WINDOW, min_obs: int = MIN_WINDOW_OBS) -> np.ndarray:
    w = _lagged_windows(np.asarray(values, float), window)
    n = np.sum(~np.isnan(w), axis=1)
    out = np.full(len(w), np.nan)
    full = n == window
    out[full] = w[full].mean(axis=1)
    part = ~full & (n >= max(min_obs, 1))
    if part.any():
        out[part] = np.nanmean(w[part], axis=1)
    return out


def _trailing_arrays(open_: np.ndarray, close: np.ndarray, shares: np.ndarray, volume: np.ndarray,
                     window: int, min_obs: int, momentum: int) -> dict[str, np.ndarray]:
    n = len(close)
    cc = np.r_[np.nan, close[1:] / close[:-1] - 1.0]
    log_dvol = np.log1p(volume * (close + open_) / 2.0)
    ret_mom = np.full(n, np.nan)
    if n > momentum:
        ret_mom[momentum + 1:] = close[momentum:-1] / close[:-momentum - 1] - 1.0
    return {
        "ret_20_1": ret_mom,
        "vol_183_1": trailing_std(cc, window, min_obs),
        "dvol_183_1": trailing_mean(log_dvol, window, min_obs),
        "mcap_lag1": np.r_[np.nan, np.log1p(shares[:-1] * close[:-1])],
        "log_dvol": log_dvol,
    }


def compute_trailing(bars: pd.DataFrame, window: int = VOL_WINDOW, min_obs: int = MIN_WINDOW_OBS,
                     momentum: int = MOMENTUM_WINDOW) -> pd.DataFrame:
    """Momentum, volatility, dollar volume and size controls, each using bars dated before t only."""
    bars, _ = validate_bars(bars)
    arrays = _trailing_arrays(*(bars[c].to_numpy(float) for c in
                                ("open", "close", "shares_outstanding", "share_volume")),
                              window, min_obs, momentum)
    return pd.DataFrame({"date": bars["date"].to_numpy(), **arrays})


def load_prices(path: str | Path) -> pd.DataFrame:
    prices = pd.read_csv(path, dtype={"ticker": str})
    missing = set(PRICE_COLUMNS) - set(prices.columns)
    if missing:
        raise ValueError(f"price file lacks columns {sorted(missing)}")
    prices["ticker"] = prices["ticker"].str.upper()
    prices["date"] = pd.to_datetime(prices["date"], format="%Y-%m-%d")
    return prices[PRICE_COLUMNS]


def compute_controls(prices: pd.DataFrame, window: int = VOL_WINDOW, min_obs: int = MIN_WINDOW_OBS,
                     momentum: int = MOMENTUM_WINDOW) -> pd.DataFrame:
    """Per (ticker, date) returns, trailing controls and FF-12 industry for a multi-ticker price frame."""
    prices, _ = validate_bars(prices)
    if prices.duplicated(["ticker", "date"]).any():
        raise ValueError("duplicate (ticker, date) bars")
    prices = prices.sort_values(["ticker", "date"], kind="mergesort")
    if prices.empty:
        return pd.DataFrame(columns=["ticker", "date"] + CONTROL_COLUMNS)
    cols = {c: prices[c].to_numpy(float) for c in ("open", "close", "shares_outstanding", "share_volume")}
    tickers = prices["ticker"].to_numpy()
    bounds = np.r_[0, np.flatnonzero(tickers[1:] != tickers[:-1]) + 1, len(tickers)]
    out = {c: np.empty(len(tickers)) for c in CONTROL_COLUMNS if c != "ff12"}
    for a, b in zip(bounds[:-1], bounds[1:]):
        o, c = cols["open"][a:b], cols["close"][a:b]
        parts = _return_arrays(o, c)
        parts.update(_trailing_arrays(o, c, cols["shares_outstanding"][a:b], cols["share_volume"][a:b],
                                      window, min_obs, momentum))
        for name, values in parts.items():
            out[name][a:b] = values
    frame = pd.DataFrame({"ticker": tickers, "date": prices["date"].to_numpy(), **out})
    frame["ff12"] = map_ff12_array(prices["sic"].to_numpy())
    return frame[["ticker", "date"] + CONTROL_COLUMNS]


def load_low_frequency(path: str | Path) -> pd.DataFrame:
    records = pd.read_csv(path, dtype={"ticker": str, "kind": str})
    missing = set(LOWFREQ_COLUMNS) - set(records.columns)
    if missing:
        raise ValueError(f"low-frequency file lacks columns {sorted(missing)}")
    records["ticker"] = records["ticker"].str.upper()
    records["as_of_date"] = pd.to_datetime(records["as_of_date"], format="%Y-%m-%d")
    unknown = set(records["kind"]) - set(LOWFREQ_KINDS)
    if unknown:
        raise ValueError(f"unknown low-frequency kinds {sorted(unknown)}")
    return records[LOWFREQ_COLUMNS]


def align_low_frequency(keys: pd.DataFrame, records: pd.DataFrame, kind: str | None = None,
                        inclusive: bool = True) -> pd.Series:
    """As-of join: each (ticker, date) row takes the latest record dated on or before it.

    With ``inclusive=False`` a record dated t becomes visible only after t.
    Returns a float series aligned with `keys` (NaN where no record precedes).
    """
    if kind is not None:
        records = records.loc[records["kind"] == kind]
    if records.duplicated(["ticker", "as_of_date"]).any():
        raise ValueError("duplicate (ticker, as_of_date) low-frequency records")
    left = pd.DataFrame({"ticker": keys["ticker"].to_numpy(), "date": pd.to_datetime(keys["date"]).to_numpy(),
                         "_row": np.arange(len(keys))})
    right = records[["ticker", "as_of_date", "value"]].rename(columns={"as_of_date": "date"})
    right = right.assign(date=pd.to_datetime(right["date"])).sort_values("date", kind="mergesort")
    merged = pd.merge_asof(left.sort_values("date", kind="mergesort"), right, on="date", by="ticker",
                           allow_exact_matches=inclusive, direction="backward")
    out = np.full(len(keys), np.nan)
    out[merged["_row"].to_numpy()] = merged["value"].to_numpy(float)
    return pd.Series(out, index=keys.index, name=kind or "value")
