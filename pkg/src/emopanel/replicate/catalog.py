"""Declarative table specifications.

Each study names a table family and a few options; :func:`build_columns`
turns it into the regression columns that make up the table.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, replace
from pathlib import Path

from ..econ.ols import RegressionSpec
from ..emotions import NON_NEUTRAL
from ..panel import emotion_column

# table id -> family name
TABLE_IDS: dict[str, str] = {
    "T2": "summary",
    "T3corr": "corr",
    "T3": "labtests",
    "T4": "premarket",
    "T5": "content",
    "T6": "leads",
    "T7": "interactions",
    "T8": "usertypes",
    "T9": "robustness",
    "T10": "market",
    "A2": "appendix_year",
    "A3": "appendix_industry",
}
REGRESSION_TABLES = ("T4", "T5", "T6", "T7", "T8", "T9", "T10")
TITLES = {
    "T2": "Summary statistics",
    "T3corr": "Correlation matrix",
    "T3": "Laboratory findings",
    "T4": "Pre-market emotions and price movements",
    "T5": "Pre-market emotions, message content and price movements",
    "T6": "Pre-market emotions and subsequent price movements",
    "T7": "Pre-market emotions, stock characteristics and price movements",
    "T8": "Pre-market emotions, investor types and price movements",
    "T9": "Robustness: pre-market emotions and price movements",
    "T10": "Market emotions and price movements",
    "A2": "Distribution of posts by calendar year",
    "A3": "Distribution of posts by industry",
}

# Display order of the emotion rows; neutral is the omitted baseline.
EMOTION_ROWS = ("happy", "sad", "fear", "disgust", "anger", "surprise")
assert set(EMOTION_ROWS) == set(NON_NEUTRAL)
CONTROLS = ("ret_co", "ret_oc_lag1", "ret_20_1", "vol_183_1")
# The interaction table lists no volatility control.
INTERACTION_CONTROLS = ("ret_co", "ret_oc_lag1", "ret_20_1")
INDEX_FILTER = "in_index == 1"

# (label, panel column, percentile, side) per interaction column
INTERACTION_DUMMIES = (
    ("$ Volume p25", "dvol_183_1", 25.0, "below"),
    ("Volatility p75", "vol_183_1", 75.0, "above"),
    ("Market Cap p25", "mcap_lag1", 25.0, "below"),
    ("Short Interest p75", "short_interest", 75.0, "above"),
    ("Institutional p25", "inst_own", 25.0, "below"),
)
USER_BLOCKS = (
    ("Trading Experience", ("amateur", "professional")),
    ("Trading Approach", ("fundamental", "technical")),
    ("Investment Horizon", ("short_horizon", "long_horizon")),
)
CONTENT_SPLITS = ("chat", "finance", "dissemination", "original")

WEIGHT_MODES = ("follower", "equal")
SOURCES = ("primary", "alternative")
# Tables whose emotion columns come from the all-message split, where the
# equal-weight and alternative-source variants exist.
_VARIANT_TABLES = ("T4", "T6", "T7", "T10")


class CatalogError(ValueError):
    """Invalid study definition or catalog file."""


@dataclass(frozen=True)
class StudyConfig:
    """One table to produce.

    Options: `weight_mode` (follower or equal) and `source` (primary or
    alternative emotion columns) pick the emotion variables of tables built
    on the all-message split; `min_messages` is the session message floor
    of the high-coverage subsample; `winsor_limits` applies to every
    continuous variable.
    """

    table_id: str
    weight_mode: str = "follower"
    source: str = "primary"
    min_messages: int = 100
    winsor_limits: tuple[float, float] = (0.001, 0.999)

    def __post_init__(self):
        if self.table_id not in TABLE_IDS:
            raise CatalogError(f"unknown table_id {self.table_id!r}; expected one of {sorted(TABLE_IDS)}")
        if self.weight_mode not in WEIGHT_MODES:
            raise CatalogError(f"{self.table_id}: weight_mode must be one of {WEIGHT_MODES}")
        if self.source not in SOURCES:
            raise CatalogError(f"{self.table_id}: source must be one of {SOURCES}")
        if (self.weight_mode, self.source) != ("follower", "primary") and self.table_id not in _VARIANT_TABLES:
            raise CatalogError(f"{self.table_id}: weight_mode/source options apply only to {_VARIANT_TABLES}")
        if self.weight_mode == "equal" and self.source == "alternative":
            raise CatalogError(f"{self.table_id}: equal weighting is defined for primary emotions only")
        if self.min_messages < 1:
            raise CatalogError(f"{self.table_id}: min_messages must be positive")
        lo, hi = self.winsor_limits
        if not 0.0 <= lo < hi <= 1.0:
            raise CatalogError(f"{self.table_id}: winsor_limits need 0 <= lower < upper <= 1")

    @property
    def family(self) -> str:
        return TABLE_IDS[self.table_id]

    @property
    def variant(self) -> str:
        if self.source == "alternative":
            return "alt"
        return "eq" if self.weight_mode == "equal" else ""


_OPTION_TYPES = {"weight_mode": str, "source": str, "min_messages": int}


def parse_study(line: str) -> StudyConfig:
    """``T4 weight_mode=equal min_messages=50`` -> StudyConfig."""
    tokens = shlex.split(line, comments=True)
    if not tokens:
        raise CatalogError("empty study line")
    table_id, kwargs = tokens[0], {}
    for tok in tokens[1:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise CatalogError(f"{table_id}: option {tok!r} is not key=value")
        if key == "winsor_limits":
            try:
                lo, hi = (float(v) for v in value.split(","))
            except ValueError:
                raise CatalogError(f"{table_id}: winsor_limits must be 'lower,upper'") from None
            kwargs[key] = (lo, hi)
        elif key in _OPTION_TYPES:
            try:
                kwargs[key] = _OPTION_TYPES[key](value)
            except ValueError:
                raise CatalogError(f"{table_id}: bad value {value!r} for {key}") from None
        else:
            raise CatalogError(f"{table_id}: unknown option {key!r}")
    return StudyConfig(table_id, **kwargs)


def parse_catalog(text: str) -> list[StudyConfig]:
    """One study per line; ``#`` starts a comment. Duplicate definitions are rejected."""
    studies = [parse_study(ln) for ln in text.splitlines() if shlex.split(ln, comments=True)]
    seen = set()
    for s in studies:
        if s in seen:
            raise CatalogError(f"duplicate study {s.table_id}")
        seen.add(s)
    return studies


def load_catalog(path: str | Path) -> list[StudyConfig]:
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# regression columns


@dataclass(frozen=True)
class ColumnSpec:
    """One regression column of a table.

    `rows` maps a display label to the regressor shown in that row;
    `flags` are the subsample markers printed beneath the estimates;
    `dummy` optionally names the percentile dummy the column needs,
    as (panel column, percentile, side).
    """

    label: str
    spec: RegressionSpec
    rows: tuple[tuple[str, str], ...]
    panel: str = ""
    block: str = ""
    flags: tuple[str, ...] = ()
    dummy: tuple[str, float, str] | None = None


def _emotions(session: str, split: str, variant: str = "") -> dict[str, str]:
    return {e.capitalize(): emotion_column(session, split, e, variant) for e in EMOTION_ROWS}


def _column(study: StudyConfig, label: str, dependent: str, shown: dict[str, str],
            controls=CONTROLS, sample_filter: str | None = None, **kw) -> ColumnSpec:
    spec = RegressionSpec(dependent, tuple(shown.values()) + tuple(controls), sample_filter=sample_filter,
                          winsor_limits=study.winsor_limits, name=f"{study.table_id} {label}")
    return ColumnSpec(label, spec, tuple(shown.items()), **kw)


def _subsample_columns(study: StudyConfig, session: str, emotions: dict[str, str], start: int,
                       count_column: str) -> list[ColumnSpec]:
    floor = f"{count_column} >= {study.min_messages}"
    return [
        _column(study, f"({start})", "ret_oc", emotions),
        _column(study, f"({start + 1})", "ret_oc", emotions, sample_filter=INDEX_FILTER, flags=("index",)),
        _column(study, f"({start + 2})", "ret_oc", emotions, sample_filter=floor, flags=("min_messages",)),
    ]


def build_columns(study: StudyConfig) -> list[ColumnSpec]:
    """Regression columns of a table, in display order. Empty for descriptive tables."""
    t, v = study.table_id, study.variant
    if t == "T4":
        emotions = _emotions("pre", "all", v)
        return [_column(study, "(1)", "ret_oc", {})] + _subsample_columns(
            study, "pre", emotions, 2, emotion_column("pre", "all", "n"))
    if t == "T5":
        return [_column(study, f"({i}) {s.capitalize()}", "ret_oc", _emotions("pre", s))
                for i, s in enumerate(CONTENT_SPLITS, 1)]
    if t == "T6":
        a = [_column(study, f"({k}) Ret t+{k}", f"ret_oc_lead{k}", _emotions("pre", "all", v), panel="A")
             for k in range(1, 5)]
        b = [_column(study, f"({k}) Ret t+{k}", f"ret_oc_lead{k}",
                     {"Valence": emotion_column("pre", "all", "valence", v)}, panel="B")
             for k in range(1, 5)]
        return a + b
    if t == "T7":
        emotions = _emotions("pre", "all", v)
        cols = [_column(study, "(1) None", "ret_oc", emotions, controls=INTERACTION_CONTROLS)]
        for i, (label, source, p, side) in enumerate(INTERACTION_DUMMIES, 2):
            shown = dict(emotions)
            shown.update({f"{e} x IV": f"{c}:iv" for e, c in emotions.items()})
            shown["IV"] = "iv"
            cols.append(_column(study, f"({i}) {label}", "ret_oc", shown, controls=INTERACTION_CONTROLS,
                                dummy=(source, p, side)))
        return cols
    if t == "T8":
        cols, i = [], 1
        for block, splits in USER_BLOCKS:
            for s in splits:
                name = s.replace("_horizon", "").capitalize()
                cols.append(_column(study, f"({i}) {name}", "ret_oc", _emotions("pre", s), block=block))
                i += 1
        return cols
    if t == "T9":
        n_col = emotion_column("pre", "all", "n")
        alt = _subsample_columns(study, "pre", _emotions("pre", "all", "alt"), 1, n_col)
        eq = _subsample_columns(study, "pre", _emotions("pre", "all", "eq"), 4, n_col)
        return [replace(c, block="Alternative emotions") for c in alt] + \
            [replace(c, block="Equal weighting") for c in eq]
    if t == "T10":
        emotions = _emotions("mkt", "all", v)
        return [_column(study, "(1)", "ret_oc", {})] + _subsample_columns(
            study, "mkt", emotions, 2, emotion_column("mkt", "all", "n"))
    return []


def required_columns(study: StudyConfig) -> list[str]:
    """Panel columns the study reads (dummy and interaction names resolved to their sources)."""
    cols: list[str] = ["ticker", "date"]
    t = study.table_id
    if t in REGRESSION_TABLES:
        cols += ["ff12"]
        for c in build_columns(study):
            for base in c.spec.base_columns:
                if base != "iv":
                    cols.append(base)
            if c.dummy:
                cols.append(c.dummy[0])
            if c.spec.sample_filter == INDEX_FILTER:
                cols.append("in_index")
            elif isinstance(c.spec.sample_filter, str):
                cols.append(c.spec.sample_filter.split()[0])
    elif t == "T2":
        cols += [c for _, _, c in SUMMARY_ROWS]
    elif t == "T3corr":
        cols += [c for _, c in CORR_COLUMNS]
    elif t == "T3":
        from ..econ.labtests import LAB_CHECKS
        for chk in LAB_CHECKS:
            cols += [chk.emotion_column, chk.target_column]
    elif t == "A2":
        cols += ["year", emotion_column("pre", "all", "n"), emotion_column("mkt", "all", "n")]
    elif t == "A3":
        cols += ["ff12", emotion_column("pre", "all", "n"), emotion_column("mkt", "all", "n")]
    return list(dict.fromkeys(cols))


# (panel, label, column) rows of the summary table
SUMMARY_ROWS: tuple[tuple[str, str, str], ...] = tuple(
    [("A", e.capitalize(), emotion_column("pre", "all", e)) for e in
     ("happy", "sad", "fear", "disgust", "anger", "surprise", "neutral")]
    + [("B", label, col) for label, col in (
        ("Open-Close Return", "ret_oc"),
        ("Close-Open Return", "ret_co"),
        ("Open-Close Return t-1", "ret_oc_lag1"),
        ("Return t-20,t-1", "ret_20_1"),
        ("$ Volume t-183,t-1", "dvol_183_1"),
        ("Volatility t-183,t-1", "vol_183_1"),
        ("Market Cap t-1", "mcap_lag1"),
        ("Institutional Ownership", "inst_own"),
        ("Short Interest", "short_interest"),
    )]
)

CORR_COLUMNS = (
    ("Daily Return", "ret_oc"),
    ("Happy", emotion_column("pre", "all", "happy")),
    ("Sad", emotion_column("pre", "all", "sad")),
    ("Fear", emotion_column("pre", "all", "fear")),
    ("Disgust", emotion_column("pre", "all", "disgust")),
    ("Anger", emotion_column("pre", "all", "anger")),
    ("Surprise", emotion_column("pre", "all", "surprise")),
    ("Neutral", emotion_column("pre", "all", "neutral")),
    ("Return oc t-1", "ret_oc_lag1"),
    ("Return co", "ret_co"),
    ("Return t-20,t-1", "ret_20_1"),
    ("Volatility t-183,t-1", "vol_183_1"),
)
