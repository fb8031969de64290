"""End-to-end steps: messages to kept set, kept set plus prices to estimation panel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from .ingest import (ALT_COLS, BOT_THRESHOLD, EMO_COLS, MIN_SESSION_MESSAGES, FilterReport, FinanceLexicon,
                     apply_restrictions, bucket_frame, classify_frame)
from .market import align_low_frequency, compute_controls
from .panel import SPLITS, Panel, aggregate_frame, assemble_panel
from .sessions import TradingCalendar

# Column definitions written to the panel sidecar.
COLUMN_NOTES = {
    "ret_oc": ("open-close return, (close - open) / open", "unit"),
    "ret_co": ("close-open return from the previous close", "unit"),
    "ret_oc_lag1": ("open-close return on the previous trading date", "unit"),
    "ret_20_1": ("close[t-1] / close[t-21] - 1", "unit"),
    "vol_183_1": ("sample std of close-to-close returns over rows t-183..t-1", "unit"),
    "dvol_183_1": ("mean of log(1 + volume * (open + close) / 2) over rows t-183..t-1", "log dollars"),
    "mcap_lag1": ("log(1 + shares[t-1] * close[t-1])", "log dollars"),
    "log_dvol": ("log(1 + volume * (open + close) / 2) on date t", "log dollars"),
    "short_interest": ("shares short / shares outstanding, latest record on or before t", "fraction"),
    "inst_own": ("institutional holdings / shares outstanding, latest record on or before t", "fraction"),
    "ff12": ("Fama-French 12-industry code", "code"),
    "in_index": ("index-member flag", "0/1"),
    "year": ("calendar year of the trading date", "year"),
}


@dataclass
class IngestResult:
    kept: pd.DataFrame
    report: FilterReport
    parse_errors: int = 0


def run_ingest(messages, security_master: pd.DataFrame, calendar: TradingCalendar,
               lexicon: FinanceLexicon | None = None, min_session_messages: int = MIN_SESSION_MESSAGES,
               bot_threshold: int = BOT_THRESHOLD, parse_errors: int = 0, label: bool = True) -> IngestResult:
    """Restrict, then (with `label`) attach content, information-type and user-bucket labels."""
    kept, report = apply_restrictions(messages, security_master, calendar, min_session_messages, bot_threshold)
    if label:
        kept = bucket_frame(classify_frame(kept, lexicon, copy=False), copy=False)
    return IngestResult(kept, report, parse_errors)


def build_panel(kept: pd.DataFrame, prices: pd.DataFrame, calendar: TradingCalendar,
                low_frequency: pd.DataFrame | None = None, index_members: Iterable[str] | None = None,
                weight_mode: str = "follower", splits: Iterable[str] = tuple(SPLITS),
                equal_weight_all: bool = True, alternative: bool = True) -> Panel:
    """Firm-day emotion aggregates joined with returns, controls and leads.

    Adds ``short_interest`` and ``inst_own`` by as-of join when
    `low_frequency` is given, the ``in_index`` flag when `index_members` is
    given, and ``year``.
    """
    aggregates = aggregate_frame(kept, splits, weight_mode, equal_weight_all, alternative)
    controls = compute_controls(prices)
    panel = assemble_panel(aggregates, controls, calendar)
    data = panel.data
    if low_frequency is not None:
        data["short_interest"] = align_low_frequency(data, low_frequency, "short_interest").to_numpy()
        data["inst_own"] = align_low_frequency(data, low_frequency, "institutional_ownership").to_numpy()
    if index_members is not None:
        members = {str(t).upper() for t in index_members}
        data["in_index"] = data["ticker"].isin(members).astype(np.int64)
    data["year"] = data["date"].dt.year.astype(np.int64)
    for col, (text, units) in COLUMN_NOTES.items():
        if col in data:
            panel.describe_column(col, text, units)
    for col in data.columns:
        if col not in panel.meta and col not in ("ticker", "date"):
            panel.describe_column(col, "firm-day emotion aggregate or message count", "share" if not
                                  col.endswith("_n") else "messages")
    return panel


KEPT_DATE_COLUMNS = ("trading_date",)


def save_kept(kept: pd.DataFrame, path) -> None:
    """Kept-message table as CSV; timestamps in UTC ISO form, floats at full precision."""
    out = kept.copy()
    if "timestamp" in out:
        out["timestamp"] = pd.to_datetime(out["timestamp"], utc=True).dt.strftime("%Y-%m-%dT%H:%M:%SZ")
    out.to_csv(path, index=False, date_format="%Y-%m-%d", float_format="%.17g", lineterminator="\n")


def load_kept(path) -> pd.DataFrame:
    kept = pd.read_csv(path, dtype={"ticker": str, "id": str, "user_id": str, "body": str}, keep_default_na=False,
                       na_values={c: [""] for c in EMO_COLS + ALT_COLS})
    if "timestamp" in kept:
        kept["timestamp"] = pd.to_datetime(kept["timestamp"], utc=True)
    for col in KEPT_DATE_COLUMNS:
        if col in kept:
            kept[col] = pd.to_datetime(kept[col], format="%Y-%m-%d")
    return kept


def load_index_members(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip().upper() for ln in fh if ln.strip() and not ln.startswith("#")]
