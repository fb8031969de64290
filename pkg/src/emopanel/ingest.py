"""Message parsing, text cleaning, sample restrictions and message classification."""

from __future__ import annotations

import datetime as dt
import io
import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .emotions import EMOTIONS, EmotionTuple
from .sessions import Session, TradingCalendar, assign_sessions

log = logging.getLogger(__name__)

EXPERIENCE = ("novice", "intermediate", "professional", "unknown")
APPROACH = ("technical", "momentum", "fundamental", "value", "growth", "global_macro", "unknown")
HORIZON = ("day", "swing", "position", "long_term", "unknown")
SENTIMENT = ("bullish", "bearish", "unclassified")

BOT_THRESHOLD = 100
MIN_SESSION_MESSAGES = 10
# Table-1 style exchange codes for US listings.
US_EXCHANGES = frozenset({11, 12, 14, 17})
# Rounded model outputs (0.1% precision) are accepted and renormalized.
EMOTION_SUM_TOL = 0.005

STAGES = ("raw", "single_ticker", "not_automated", "security_master", "min_session_messages")

EMO_COLS = [f"emo_{e}" for e in EMOTIONS]
ALT_COLS = [f"alt_{e}" for e in EMOTIONS]

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_CASHTAG_RE = re.compile(r"\$[a-z][a-z0-9.\-]*", re.IGNORECASE)
_PUNCT_RE = re.compile(r"[^\w\s]|_")
_SPACE_RE = re.compile(r"\s+")


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class RawMessage:
    id: str
    user_id: str
    timestamp: dt.datetime
    body: str
    cashtags: tuple[str, ...]
    follower_count: int
    is_retweet: bool = False
    urls: tuple[str, ...] = ()
    likes: int = 0
    user_experience: str = "unknown"
    user_approach: str = "unknown"
    user_horizon: str = "unknown"
    emotion: EmotionTuple | None = None
    sentiment_tag: str = "unclassified"
    # Second emotion source (alternative model output); optional.
    emotion_alt: EmotionTuple | None = None

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "user_id": self.user_id,
            "timestamp": self.timestamp.isoformat(),
            "body": self.body,
            "cashtags": list(self.cashtags),
            "follower_count": self.follower_count,
            "is_retweet": self.is_retweet,
            "urls": list(self.urls),
            "likes": self.likes,
            "user_experience": self.user_experience,
            "user_approach": self.user_approach,
            "user_horizon": self.user_horizon,
            "emotion": self.emotion.as_list() if self.emotion is not None else None,
            "sentiment_tag": self.sentiment_tag,
        }
        if self.emotion_alt is not None:
            rec["emotion_alt"] = self.emotion_alt.as_list()
        return rec


def serialize_message(msg: RawMessage) -> str:
    return json.dumps(msg.to_record(), ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class ContentLabel:
    chat_class: str  # "finance" | "chat"
    info_class: str  # "original" | "dissemination"


@dataclass(frozen=True)
class UserBuckets:
    experience: str  # amateur | professional | unknown
    approach: str  # technical | fundamental | other | unknown
    horizon: str  # short | long | unknown


@dataclass
class FilterReport:
    """Retained message counts after each restriction stage, in application order."""

    stages: list[tuple[str, int]] = field(default_factory=list)

    def add(self, name: str, retained: int) -> None:
        if self.stages and retained > self.stages[-1][1]:
            raise ValueError(f"stage {name!r} retained more messages than its predecessor")
        self.stages.append((name, int(retained)))

    @property
    def counts(self) -> dict[str, int]:
        return dict(self.stages)

    @property
    def pass_rates(self) -> dict[str, float]:
        """Share of the previous stage's messages that survive each stage."""
        rates = {}
        prev = None
        for name, n in self.stages:
            rates[name] = 1.0 if prev is None else (n / prev if prev else 0.0)
            prev = n
        return rates

    def to_frame(self) -> pd.DataFrame:
        rates = self.pass_rates
        return pd.DataFrame(
            [(name, n, rates[name]) for name, n in self.stages],
            columns=["stage", "retained_messages", "pass_rate"],
        )


# ---------------------------------------------------------------------------
# parsing


def _parse_timestamp(value) -> dt.datetime:
    if not isinstance(value, str):
        raise ParseError("timestamp must be a string")
    try:
        ts = dt.datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ParseError(f"bad timestamp {value!r}") from exc
    if ts.tzinfo is None:
        raise ParseError(f"timestamp {value!r} has no zone offset")
    return ts


def _parse_emotion(value) -> EmotionTuple | None:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != len(EMOTIONS):
        raise ParseError("emotion must be a 7-array")
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1:
        raise ParseError("emotion components must lie in [0, 1]")
    total = arr.sum()
    if abs(total - 1.0) > EMOTION_SUM_TOL:
        raise ParseError(f"emotion components sum to {total:.6f}")
    if total != 1.0:
        arr = arr / total
    return EmotionTuple.from_sequence(arr)


def _enum(rec: dict, key: str, allowed: Sequence[str], default: str) -> str:
    value = rec.get(key, default)
    if value is None:
        return default
    value = str(value).lower()
    if value not in allowed:
        raise ParseError(f"{key}={value!r} not in {allowed}")
    return value


def _count(rec: dict, key: str, default=None) -> int:
    value = rec.get(key, default)
    if value is None or isinstance(value, bool) or int(value) != value:
        raise ParseError(f"{key} must be an integer")
    if value < 0:
        raise ParseError(f"{key} must be non-negative")
    return int(value)


def parse_record(rec: dict) -> RawMessage:
    if not isinstance(rec, dict):
        raise ParseError("record is not an object")
    for key in ("id", "user_id", "timestamp", "body", "cashtags", "follower_count"):
        if key not in rec:
            raise ParseError(f"missing field {key!r}")
    tags = rec["cashtags"]
    if not isinstance(tags, list):
        raise ParseError("cashtags must be a list")
    cashtags = tuple(str(t).lstrip("$").strip().upper() for t in tags)
    if any(not t for t in cashtags):
        raise ParseError("empty cashtag")
    urls = rec.get("urls") or []
    if not isinstance(urls, list):
        raise ParseError("urls must be a list")
    body = rec["body"]
    if not isinstance(body, str):
        raise ParseError("body must be a string")
    return RawMessage(
        id=str(rec["id"]),
        user_id=str(rec["user_id"]),
        timestamp=_parse_timestamp(rec["timestamp"]),
        body=body,
        cashtags=cashtags,
        follower_count=_count(rec, "follower_count"),
        is_retweet=bool(rec.get("is_retweet", False)),
        urls=tuple(str(u) for u in urls),
        likes=_count(rec, "likes", 0),
        user_experience=_enum(rec, "user_experience", EXPERIENCE, "unknown"),
        user_approach=_enum(rec, "user_approach", APPROACH, "unknown"),
        user_horizon=_enum(rec, "user_horizon", HORIZON, "unknown"),
        emotion=_parse_emotion(rec.get("emotion")),
        sentiment_tag=_enum(rec, "sentiment_tag", SENTIMENT, "unclassified"),
        emotion_alt=_parse_emotion(rec.get("emotion_alt")),
    )


def parse_message_stream(source: str | Path | Iterable[str] | io.IOBase) -> tuple[list[RawMessage], int]:
    """Parse line-delimited JSON messages.

    Malformed lines (including blank ones) are counted and skipped. A path
    that cannot be opened raises ``OSError``.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return parse_message_stream(fh)
    messages: list[RawMessage] = []
    errors = 0
    for lineno, line in enumerate(source, start=1):
        try:
            messages.append(parse_record(json.loads(line)))
        except (ValueError, TypeError, KeyError) as exc:
            errors += 1
            log.debug("line %d skipped: %s", lineno, exc)
    return messages, errors


def write_message_stream(messages: Iterable[RawMessage], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for msg in messages:
            fh.write(serialize_message(msg))
            fh.write("\n")
            n += 1
    return n


# ---------------------------------------------------------------------------
# text


def clean_text(body: str) -> str:
    """Canonical form used for duplicate detection and the finance lexicon."""
    text = unicodedata.normalize("NFC", body).lower()
    text = _URL_RE.sub(" ", text)
    text = _CASHTAG_RE.sub(" ", text)
    text = _PUNCT_RE.sub("", text)
    return _SPACE_RE.sub(" ", text).strip()


def has_inline_url(body: str) -> bool:
    return _URL_RE.search(body) is not None


def _clean_codes(bodies: pd.Series) -> tuple[np.ndarray, list[str]]:
    """Factorize cleaned texts, cleaning each distinct raw body once."""
    raw_codes, raw_uniques = pd.factorize(bodies, use_na_sentinel=False)
    cleaned = [clean_text(b) for b in raw_uniques]
    clean_codes, clean_uniques = pd.factorize(pd.Series(cleaned, dtype=object))
    return clean_codes[raw_codes], list(clean_uniques)


class FinanceLexicon:
    """Whole-word / whole-phrase keyword matcher on cleaned text."""

    def __init__(self, terms: Iterable[str], version: str = "custom"):
        words, phrases = set(), []
        for term in terms:
            term = clean_text(term)
            if not term:
                continue
            if " " in term:
                phrases.append(f" {term} ")
            else:
                words.add(term)
        self.words = frozenset(words)
        self.phrases = tuple(sorted(set(phrases)))
        self.version = version

    @classmethod
    def from_lines(cls, lines: Iterable[str], version: str = "custom") -> "FinanceLexicon":
        terms = []
        for line in lines:
            line = line.strip()
            if line.startswith("#"):
                if line.lower().startswith("# finance lexicon"):
                    version = line[1:].strip()
                continue
            if line:
                terms.append(line)
        return cls(terms, version)

    @classmethod
    def from_file(cls, path: str | Path) -> "FinanceLexicon":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())

    @classmethod
    def default(cls) -> "FinanceLexicon":
        text = resources.files("emopanel").joinpath("data/finance_lexicon.txt").read_text(encoding="utf-8")
        return cls.from_lines(text.splitlines())

    def matches(self, cleaned: str) -> bool:
        if not self.words.isdisjoint(cleaned.split()):
            return True
        padded = f" {cleaned} "
        return any(p in padded for p in self.phrases)


# ---------------------------------------------------------------------------
# columnar form


def messages_to_frame(messages: Sequence[RawMessage]) -> pd.DataFrame:
    """Columnar view used by the restriction and aggregation steps."""
    nan7 = [np.nan] * len(EMOTIONS)
    rows = []
    for m in messages:
        rows.append(
            [m.id, m.user_id, m.timestamp, m.body, m.cashtags[0] if len(m.cashtags) == 1 else "",
             len(m.cashtags), m.follower_count, m.is_retweet, bool(m.urls) or has_inline_url(m.body),
             m.likes, m.user_experience, m.user_approach, m.user_horizon, m.sentiment_tag]
            + (m.emotion.as_list() if m.emotion is not None else nan7)
            + (m.emotion_alt.as_list() if m.emotion_alt is not None else nan7)
        )
    columns = ["id", "user_id", "timestamp", "body", "ticker", "n_cashtags", "follower_count", "is_retweet",
               "has_url", "likes", "user_experience", "user_approach", "user_horizon",
               "sentiment_tag"] + EMO_COLS + ALT_COLS
    frame = pd.DataFrame(rows, columns=columns)
    if len(frame):
        frame["timestamp"] = pd.to_datetime(
            [m.timestamp.astimezone(dt.timezone.utc).replace(tzinfo=None) for m in messages]
        ).tz_localize("UTC")
    else:
        frame["timestamp"] = pd.Series([], dtype="datetime64[ns, UTC]")
    frame["follower_count"] = frame["follower_count"].astype(np.int64)
    frame["n_cashtags"] = frame["n_cashtags"].astype(np.int64)
    frame["likes"] = frame["likes"].astype(np.int64)
    frame["is_retweet"] = frame["is_retweet"].astype(bool)
    frame["has_url"] = frame["has_url"].astype(bool)
    return frame


def _as_frame(messages) -> pd.DataFrame:
    if isinstance(messages, pd.DataFrame):
        return messages
    return messages_to_frame(list(messages))


# ---------------------------------------------------------------------------
# restrictions


def automated_mask(frame: pd.DataFrame, threshold: int = BOT_THRESHOLD) -> np.ndarray:
    """Boolean mask of messages whose (user, cleaned text) pair occurs more than `threshold` times."""
    if frame.empty:
        return np.zeros(0, dtype=bool)
    text_codes, _ = _clean_codes(frame["body"])
    user_codes, _ = pd.factorize(frame["user_id"])
    key = user_codes.astype(np.int64) * (int(text_codes.max()) + 1) + text_codes
    codes, _ = pd.factorize(key)
    return np.bincount(codes)[codes] > threshold


def detect_automated(messages, threshold: int = BOT_THRESHOLD) -> set[str]:
    """Ids of every message whose (user, cleaned text) pair is posted more than `threshold` times."""
    frame = _as_frame(messages)
    mask = automated_mask(frame, threshold)
    return set(frame.loc[mask, "id"].astype(str))


def security_master_ok(master: pd.DataFrame) -> pd.Series:
    """Active common ordinary shares listed on a US exchange, indexed by ticker."""
    secstat = master["secstat"].astype(str).str.strip().str.upper()
    tpci = master["tpci"].astype(str).str.strip()
    exchg = pd.to_numeric(master["exchg"], errors="coerce")
    ok = (secstat != "I") & (tpci == "0") & exchg.isin(US_EXCHANGES)
    return pd.Series(ok.to_numpy(), index=master["ticker"].astype(str).str.upper())


def load_security_master(path: str | Path) -> pd.DataFrame:
    master = pd.read_csv(path, dtype={"ticker": str, "secstat": str, "tpci": str})
    missing = {"ticker", "secstat", "tpci", "exchg", "sic"} - set(master.columns)
    if missing:
        raise ValueError(f"security master lacks columns {sorted(missing)}")
    master["ticker"] = master["ticker"].str.upper()
    if master["ticker"].duplicated().any():
        raise ValueError("security master has duplicate tickers")
    return master


def apply_restrictions(
    messages,
    security_master: pd.DataFrame,
    calendar: TradingCalendar,
    min_session_messages: int = MIN_SESSION_MESSAGES,
    bot_threshold: int = BOT_THRESHOLD,
) -> tuple[pd.DataFrame, FilterReport]:
    """Apply the sample restrictions in order and report retained counts.

    Stages: single ticker, not automated, security master (active, common
    ordinary, US exchange; unknown tickers fail here), and at least
    `min_session_messages` retained messages per (ticker, trading date,
    session). Messages outside every session window fail the last stage.
    Duplicate counting for the bot rule runs over the full input.

    Returns the kept rows with ``trading_date`` and ``session`` attached.
    """
    frame = _as_frame(messages)
    report = FilterReport()
    report.add("raw", len(frame))

    keep = (frame["n_cashtags"] == 1).to_numpy()
    report.add("single_ticker", int(keep.sum()))

    keep &= ~automated_mask(frame, bot_threshold)
    report.add("not_automated", int(keep.sum()))

    ok = security_master_ok(security_master)
    keep &= frame["ticker"].isin(ok.index[ok.to_numpy()]).to_numpy()
    report.add("security_master", int(keep.sum()))

    sessions = assign_sessions(frame["timestamp"].loc[keep], calendar)
    in_scope = sessions["trading_date"].notna().to_numpy()
    rows = np.flatnonzero(keep)[in_scope]
    sessions = sessions.loc[in_scope]
    # per (ticker, trading date, session) counts on integer keys
    t_codes, _ = pd.factorize(frame["ticker"].iloc[rows])
    days = sessions["trading_date"].to_numpy().astype("datetime64[D]").astype(np.int64)
    is_mkt = (sessions["session"].to_numpy() == Session.MARKET.value).astype(np.int64)
    key = (t_codes.astype(np.int64) * (days.max() - days.min() + 1 if len(days) else 1)
           + (days - (days.min() if len(days) else 0))) * 2 + is_mkt
    codes, _ = pd.factorize(key)
    enough = np.bincount(codes)[codes] >= min_session_messages
    kept = frame.take(rows[enough])
    kept.index = pd.RangeIndex(len(kept))
    kept["trading_date"] = sessions["trading_date"].to_numpy()[enough]
    kept["session"] = sessions["session"].to_numpy()[enough]
    report.add("min_session_messages", len(kept))
    return kept, report


# ---------------------------------------------------------------------------
# classification


def _info_class(is_retweet: bool, has_url: bool) -> str:
    return "dissemination" if is_retweet or has_url else "original"


def classify_content(msg: RawMessage, lexicon: FinanceLexicon | None = None) -> ContentLabel:
    lexicon = lexicon or FinanceLexicon.default()
    chat = "finance" if lexicon.matches(clean_text(msg.body)) else "chat"
    info = _info_class(msg.is_retweet, bool(msg.urls) or has_inline_url(msg.body))
    return ContentLabel(chat_class=chat, info_class=info)


def classify_frame(frame: pd.DataFrame, lexicon: FinanceLexicon | None = None, copy: bool = True) -> pd.DataFrame:
    """Attach ``chat_class`` and ``info_class`` columns (vectorized :func:`classify_content`)."""
    lexicon = lexicon or FinanceLexicon.default()
    out = frame.copy() if copy else frame
    if out.empty:
        out["chat_class"] = pd.Series([], dtype=object)
        out["info_class"] = pd.Series([], dtype=object)
        return out
    codes, uniques = _clean_codes(out["body"])
    is_fin = np.array([lexicon.matches(t) for t in uniques], dtype=bool)[codes]
    out["chat_class"] = np.where(is_fin, "finance", "chat")
    dissem = out["is_retweet"].to_numpy(bool) | out["has_url"].to_numpy(bool)
    out["info_class"] = np.where(dissem, "dissemination", "original")
    return out


_EXPERIENCE_BUCKET = {"novice": "amateur", "intermediate": "amateur", "professional": "professional"}
_APPROACH_BUCKET = {"technical": "technical", "momentum": "technical", "fundamental": "fundamental",
                    "value": "fundamental", "growth": "fundamental", "global_macro": "other"}
_HORIZON_BUCKET = {"day": "short", "swing": "short", "position": "long", "long_term": "long"}


def bucket_user(msg: RawMessage) -> UserBuckets:
    return UserBuckets(
        experience=_EXPERIENCE_BUCKET.get(msg.user_experience, "unknown"),
        approach=_APPROACH_BUCKET.get(msg.user_approach, "unknown"),
        horizon=_HORIZON_BUCKET.get(msg.user_horizon, "unknown"),
    )


def _map_labels(column: pd.Series, mapping: dict[str, str]) -> np.ndarray:
    codes, uniques = pd.factorize(column, use_na_sentinel=False)
    return np.array([mapping.get(u, "unknown") for u in uniques], dtype=object)[codes]


def bucket_frame(frame: pd.DataFrame, copy: bool = True) -> pd.DataFrame:
    """Attach ``experience_bucket``, ``approach_bucket`` and ``horizon_bucket`` (vectorized :func:`bucket_user`)."""
    out = frame.copy() if copy else frame
    out["experience_bucket"] = _map_labels(out["user_experience"], _EXPERIENCE_BUCKET)
    out["approach_bucket"] = _map_labels(out["user_approach"], _APPROACH_BUCKET)
    out["horizon_bucket"] = _map_labels(out["user_horizon"], _HORIZON_BUCKET)
    return out
