"""Firm-day emotion aggregation and estimation-panel assembly."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .emotions import EMOTIONS, NEGATIVE, EmotionTuple
from .sessions import Session, TradingCalendar, assign_session  # noqa: F401  (re-exported)

WEIGHT_MODES = ("follower", "equal")

# split name -> (message column, value); None selects every message.
SPLITS: dict[str, tuple[str, str] | None] = {
    "all": None,
    "finance": ("chat_class", "finance"),
    "chat": ("chat_class", "chat"),
    "original": ("info_class", "original"),
    "dissemination": ("info_class", "dissemination"),
    "amateur": ("experience_bucket", "amateur"),
    "professional": ("experience_bucket", "professional"),
    "fundamental": ("approach_bucket", "fundamental"),
    "technical": ("approach_bucket", "technical"),
    "short_horizon": ("horizon_bucket", "short"),
    "long_horizon": ("horizon_bucket", "long"),
}
N_LEADS = 4


def emotion_column(session: str, split: str, emotion: str, variant: str = "") -> str:
    """Panel column name, e.g. ``pre_all_happy`` or ``pre_all_eq_happy``."""
    mid = f"{split}_{variant}" if variant else split
    return f"{session}_{mid}_{emotion}"


def follower_weights(follower_count) -> np.ndarray:
    """1 + ln(1 + followers)."""
    return 1.0 + np.log1p(np.asarray(follower_count, dtype=float))


def message_weights(follower_count, weight_mode: str) -> np.ndarray:
    if weight_mode == "follower":
        return follower_weights(follower_count)
    if weight_mode == "equal":
        return np.ones(np.shape(follower_count), dtype=float)
    raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}")


def aggregate_emotions(messages: Sequence, weight_mode: str = "follower",
                       follower_counts: Sequence[int] | None = None) -> EmotionTuple:
    """Weighted mean of message emotion tuples.

    `messages` holds objects with ``emotion`` and ``follower_count``
    attributes, or bare :class:`EmotionTuple` values paired with
    `follower_counts`.
    """
    if len(messages) == 0:
        raise ValueError("cannot aggregate an empty set of messages")
    if follower_counts is None:
        tuples = [m.emotion for m in messages]
        follower_counts = [m.follower_count for m in messages]
    else:
        tuples = list(messages)
    if any(t is None for t in tuples):
        raise ValueError("every message needs an emotion tuple")
    values = np.array([t.as_list() for t in tuples], dtype=float)
    w = message_weights(follower_counts, weight_mode)
    mean = w @ values / w.sum()
    return EmotionTuple.from_sequence(mean)


def compute_valence(t: EmotionTuple | Mapping[str, float]) -> float:
    """Happy minus sad, anger, disgust and fear."""
    get = (lambda k: getattr(t, k)) if isinstance(t, EmotionTuple) else t.__getitem__
    return float(get("happy") - sum(get(k) for k in NEGATIVE))


def _order_stat_index(n: int, q: float) -> int:
    # nearest order statistic to the linear-interpolation position, halves rounded up
    return int(np.floor((n - 1) * q + 0.5))


def winsorize(column, lower: float = 0.001, upper: float = 0.999, method: str = "nearest"):
    """Clip a column at its `lower` and `upper` quantiles; missing values pass through.

    ``method="nearest"`` uses the order statistics closest to the linear
    interpolation positions, which makes the operation idempotent.
    ``method="linear"`` interpolates between neighbouring order statistics.
    Returns the same container type it was given (Series or ndarray).
    """
    if not 0.0 <= lower < upper <= 1.0:
        raise ValueError(f"need 0 <= lower < upper <= 1, got {lower}, {upper}")
    values = np.asarray(column, dtype=float)
    finite = values[~np.isnan(values)]
    if finite.size == 0:
        raise ValueError("cannot winsorize an all-missing column")
    lo, hi = winsor_bounds(finite, lower, upper, method)
    out = np.where(np.isnan(values), np.nan, np.clip(values, lo, hi))
    if isinstance(column, pd.Series):
        return pd.Series(out, index=column.index, name=column.name)
    return out


def winsor_bounds(finite: np.ndarray, lower: float, upper: float, method: str = "nearest") -> tuple[float, float]:
    n = finite.size
    if method == "nearest":
        k_lo, k_hi = _order_stat_index(n, lower), _order_stat_index(n, upper)
        part = np.partition(finite, sorted({k_lo, k_hi}))
        return float(part[k_lo]), float(part[k_hi])
    if method == "linear":
        lo, hi = np.quantile(finite, [lower, upper], method="linear")
        return float(lo), float(hi)
    raise ValueError(f"unknown quantile method {method!r}")


def make_percentile_dummy(column, p: float, side: str):
    """1 where the value is at or below (``side="below"``) / at or above the pooled p-th percentile.

    Thresholds use linear interpolation; missing values stay missing.
    """
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    values = np.asarray(column, dtype=float)
    mask = ~np.isnan(values)
    out = np.full(values.shape, np.nan)
    if mask.any():
        threshold = np.quantile(values[mask], p / 100.0, method="linear")
        hit = values[mask] <= threshold if side == "below" else values[mask] >= threshold
        out[mask] = hit.astype(float)
    if isinstance(column, pd.Series):
        return pd.Series(out, index=column.index, name=column.name)
    return out


# ---------------------------------------------------------------------------
# firm-day aggregation


def aggregate_frame(
    kept: pd.DataFrame,
    splits: Iterable[str] = tuple(SPLITS),
    weight_mode: str = "follower",
    equal_weight_all: bool = True,
    alternative: bool = True,
) -> pd.DataFrame:
    """Firm-day emotion aggregates per session and split.

    `kept` carries ``ticker``, ``trading_date``, ``session``,
    ``follower_count``, the ``emo_*`` columns and whatever classification
    columns the requested splits use. Produces one row per (ticker, date)
    with ``{session}_{split}_{emotion}``, ``{session}_{split}_valence`` and
    ``{session}_{split}_n`` columns. Splits with no messages are NaN (count
    0). Optional extras on the ``all`` split: equal weighting (``_eq_``) and
    the alternative emotion source (``_alt_``).
    """
    splits = list(splits)
    for s in splits:
        if s not in SPLITS:
            raise ValueError(f"unknown split {s!r}")
    emo = kept[[f"emo_{e}" for e in EMOTIONS]].to_numpy(float)
    has_emo = ~np.isnan(emo).any(axis=1)

    t_codes, t_uniques = pd.factorize(kept["ticker"], sort=True)
    d_codes, d_uniques = pd.factorize(pd.to_datetime(kept["trading_date"]).to_numpy(), sort=True)
    pair = t_codes.astype(np.int64) * max(len(d_uniques), 1) + d_codes
    # hash, then sort the (few) distinct keys so rows come out in (ticker, date) order
    pair_codes, pair_uniques = pd.factorize(pair)
    order = np.argsort(pair_uniques, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    fd_codes, pair_uniques = rank[pair_codes], pair_uniques[order]
    n_fd = len(pair_uniques)
    sess = (kept["session"] == Session.MARKET.value).to_numpy(dtype=np.int64)
    group = fd_codes * 2 + sess
    n_groups = 2 * n_fd

    n_d = max(len(d_uniques), 1)
    out = {"ticker": np.asarray(t_uniques, dtype=object)[pair_uniques // n_d],
           "date": pd.DatetimeIndex(d_uniques)[pair_uniques % n_d]}
    base_w = message_weights(kept["follower_count"].to_numpy(), weight_mode)

    def emit(split: str, mask: np.ndarray, values: np.ndarray, weights: np.ndarray, variant: str = "",
             count: bool = True) -> None:
        g = group[mask]
        w = weights[mask]
        wsum = np.bincount(g, weights=w, minlength=n_groups)
        cnt = np.bincount(g, minlength=n_groups)
        with np.errstate(invalid="ignore", divide="ignore"):
            means = np.column_stack([
                np.bincount(g, weights=w * values[mask, j], minlength=n_groups) / wsum
                for j in range(len(EMOTIONS))
            ])
        means[cnt == 0] = np.nan
        for s_code, s_name in ((0, Session.PRE_MARKET.value), (1, Session.MARKET.value)):
            block = means[s_code::2]
            for j, e in enumerate(EMOTIONS):
                out[emotion_column(s_name, split, e, variant)] = block[:, j]
            valence = block[:, EMOTIONS.index("happy")] - sum(block[:, EMOTIONS.index(k)] for k in NEGATIVE)
            out[emotion_column(s_name, split, "valence", variant)] = valence
            if count:
                out[emotion_column(s_name, split, "n")] = cnt[s_code::2]

    for split in splits:
        rule = SPLITS[split]
        mask = has_emo.copy()
        if rule is not None:
            col, value = rule
            if col not in kept:
                raise ValueError(f"split {split!r} needs message column {col!r}")
            mask &= (kept[col] == value).to_numpy(dtype=bool)
        emit(split, mask, emo, base_w)
        if split == "all" and equal_weight_all:
            emit(split, has_emo, emo, np.ones_like(base_w), variant="eq", count=False)
    if alternative and "alt_neutral" in kept:
        alt = kept[[f"alt_{e}" for e in EMOTIONS]].to_numpy(float)
        has_alt = ~np.isnan(alt).any(axis=1)
        if has_alt.any():
            emit("all", has_alt, np.nan_to_num(alt), base_w, variant="alt", count=False)
    return pd.DataFrame(out)


# ---------------------------------------------------------------------------
# panel container


@dataclass
class Panel:
    """Rectangular firm-day dataset keyed by (ticker, date) with column metadata."""

    data: pd.DataFrame
    meta: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if self.data.duplicated(["ticker", "date"]).any():
            raise ValueError("panel has duplicate (ticker, date) rows")

    def __len__(self) -> int:
        return len(self.data)

    @property
    def columns(self) -> list[str]:
        return list(self.data.columns)

    def describe_column(self, name: str, description: str, units: str = "", winsorized: bool = False) -> None:
        self.meta[name] = {"description": description, "units": units, "winsorized": winsorized}

    def to_csv(self, path: str | Path) -> Path:
        """Write the panel and a ``.meta.json`` sidecar; returns the sidecar path."""
        path = Path(path)
        self.data.to_csv(path, index=False, date_format="%Y-%m-%d", float_format="%.17g", lineterminator="\n")
        sidecar = path.with_suffix(".meta.json")
        columns = [{"name": c, "dtype": str(self.data[c].dtype),
                    **self.meta.get(c, {"description": "", "units": "", "winsorized": False})}
                   for c in self.data.columns]
        sidecar.write_text(json.dumps({"rows": len(self.data), "columns": columns}, indent=2) + "\n",
                           encoding="utf-8")
        return sidecar

    @classmethod
    def from_csv(cls, path: str | Path) -> "Panel":
        path = Path(path)
        data = pd.read_csv(path, dtype={"ticker": str})
        data["date"] = pd.to_datetime(data["date"], format="%Y-%m-%d")
        meta = {}
        sidecar = path.with_suffix(".meta.json")
        if sidecar.exists():
            for col in json.loads(sidecar.read_text(encoding="utf-8"))["columns"]:
                name, dtype = col.pop("name"), col.pop("dtype", None)
                # "%.17g" writes integral floats without a decimal point
                if dtype and name in data and dtype.startswith("float"):
                    data[name] = data[name].astype(dtype)
                meta[name] = col
        return cls(data, meta)


def lead_returns(controls: pd.DataFrame, calendar: TradingCalendar, n_leads: int = N_LEADS) -> pd.DataFrame:
    """``ret_oc_lead{k}``: the ticker's open-close return k trading dates later (NaN when absent)."""
    cal_index = pd.DatetimeIndex(pd.to_datetime(calendar.dates))
    dates = pd.DatetimeIndex(pd.to_datetime(controls["date"]))
    pos = cal_index.get_indexer(dates)
    lookup = pd.Series(controls["ret_oc"].to_numpy(float),
                       index=pd.MultiIndex.from_arrays([controls["ticker"].to_numpy(), pos]))
    lookup = lookup[pos >= 0]
    out = {}
    for k in range(1, n_leads + 1):
        target = pd.MultiIndex.from_arrays([controls["ticker"].to_numpy(), np.where(pos >= 0, pos + k, -1)])
        out[f"ret_oc_lead{k}"] = lookup.reindex(target).to_numpy()
    return pd.DataFrame(out, index=controls.index)


def assemble_panel(aggregates: pd.DataFrame, controls: pd.DataFrame, calendar: TradingCalendar,
                   n_leads: int = N_LEADS) -> Panel:
    """Inner-join firm-day aggregates with controls on (ticker, date) and attach lead returns."""
    for name, frame in (("aggregates", aggregates), ("controls", controls)):
        if frame.duplicated(["ticker", "date"]).any():
            raise ValueError(f"duplicate (ticker, date) rows in {name}")
    controls = controls.assign(date=pd.to_datetime(controls["date"]))
    controls = pd.concat([controls, lead_returns(controls, calendar, n_leads)], axis=1)
    aggregates = aggregates.assign(date=pd.to_datetime(aggregates["date"]))
    data = aggregates.merge(controls, on=["ticker", "date"], how="inner", validate="one_to_one")
    data = data.sort_values(["ticker", "date"], kind="mergesort").reset_index(drop=True)
    return Panel(data)
