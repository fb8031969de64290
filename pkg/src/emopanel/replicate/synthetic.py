"""Synthetic messages, prices and reference data with planted return coefficients.

Emotion shares follow a three-level Dirichlet hierarchy (firm, firm-day,
message) centred on target means. Open-close returns follow the firm-day
regression model with firm and date effects, planted loadings on the
pre-market (and optionally market-hours) follower-weighted emotion
aggregates, a lagged return, the overnight return, and Gaussian noise.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from pandas.tseries.holiday import USFederalHolidayCalendar
from pandas.tseries.offsets import CustomBusinessDay

from ..emotions import EMOTIONS, NON_NEUTRAL
from ..ingest import ALT_COLS, APPROACH, EMO_COLS, EXPERIENCE, HORIZON, SENTIMENT
from ..market import map_ff12
from ..panel import follower_weights
from ..sessions import EASTERN, Session, TradingCalendar

# Firm-day emotion means from the summary-statistics table (sum 1.001 before renormalizing).
TABLE2_MEANS = {"neutral": 0.511, "happy": 0.246, "sad": 0.036, "anger": 0.024, "disgust": 0.037,
                "surprise": 0.062, "fear": 0.085}
# Pre-market loadings of the baseline specification.
TABLE4_BETAS = {"happy": 0.0052, "sad": -0.0242, "fear": -0.0064, "disgust": -0.0041, "anger": -0.0050,
                "surprise": -0.0068}
CALIBRATION_TOL = 0.005

ORGANIC_TEMPLATES = (
    # finance
    "eps beat and raising guidance",
    "earnings call tonight watch the revenue line",
    "loading more shares before earnings",
    "price target raised by analysts",
    "breakout above resistance on heavy volume",
    "short squeeze incoming",
    "margins look weak this quarter",
    "dividend hike announced",
    "support held at the lows buying calls",
    "selling puts into the dip",
    "check the filing https://example.com/f",
    # chat
    "to the moon",
    "not feeling it today",
    "this is painful",
    "wow did not expect that",
    "love this company",
    "what a day",
    "why is nobody talking about this",
    "lol",
    "ugh",
    "good morning everyone",
    "nice :)",
    "read this www.example.org/post",
)
BOT_TEXT = "free alerts join now"
_TEMPLATE_LINK = np.array(["http" in t or "www" in t for t in ORGANIC_TEMPLATES])

@dataclass
class SyntheticConfig:
    """Planted data-generating process.

    Emotion shares: firm means ~ Dirichlet(firm_concentration * means),
    firm-day means ~ Dirichlet(day_concentration * firm mean), messages ~
    Dirichlet(message_concentration * firm-day mean).
    Returns: ret_oc = firm + date + sum(beta * pre) + sum(market_beta * mkt)
    + gamma * ret_oc[t-1] + zeta_co * ret_co + noise.
    """

    n_firms: int = 500
    n_dates: int = 250
    burn_in: int = 70
    start_date: str = "2019-01-02"
    n_users: int = 5000
    # message counts per firm-day session: floor + Poisson(rate), a share of firms is heavily discussed
    message_floor: int = 10
    extra_mean: float = 2.0
    popular_share: float = 0.02
    popular_mean: float = 110.0
    market_messages: bool = True
    alternative_emotions: bool = True
    follower_log_mean: float = 3.5
    follower_log_sd: float = 2.0
    zero_follower_share: float = 0.1
    emotion_means: dict[str, float] = field(default_factory=lambda: dict(TABLE2_MEANS))
    firm_concentration: float = 16.0
    day_concentration: float = 26.0
    message_concentration: float = 2.0
    alt_concentration: float = 40.0
    beta: dict[str, float] = field(default_factory=lambda: dict(TABLE4_BETAS))
    market_beta: dict[str, float] = field(default_factory=lambda: {e: 0.0 for e in NON_NEUTRAL})
    gamma: float = 0.0
    zeta_co: float = 0.0
    firm_fe_sd: float = 0.002
    date_fe_sd: float = 0.01
    noise_sd: float = 0.045
    ret_co_sd: float = 0.02
    index_share: float = 0.35
    n_bots: int = 2
    bot_posts: int = 150
    multi_ticker_messages: int = 50
    inactive_ticker_messages: int = 30
    retweet_share: float = 0.15
    url_share: float = 0.1

    def __post_init__(self):
        if self.noise_sd <= 0:
            raise ValueError("noise_sd must be positive")
        if self.n_firms < 12:
            raise ValueError("n_firms must cover all 12 industries")
        if self.n_dates < 2 or self.burn_in < 0:
            raise ValueError("n_dates must be at least 2 and burn_in non-negative")
        if self.message_floor < 0 or self.extra_mean < 0:
            raise ValueError("message counts must be non-negative")
        for name in ("beta", "market_beta"):
            unknown = set(getattr(self, name)) - set(NON_NEUTRAL)
            if unknown:
                raise ValueError(f"{name} has unknown emotions {sorted(unknown)}")
        self.target_means()

    def target_means(self) -> np.ndarray:
        """Emotion means in storage order, renormalized when within 0.005 of the simplex."""
        missing = set(EMOTIONS) - set(self.emotion_means)
        if missing:
            raise ValueError(f"emotion_means lacks {sorted(missing)}")
        mu = np.array([self.emotion_means[e] for e in EMOTIONS], dtype=float)
        if (mu <= 0).any() or abs(mu.sum() - 1.0) > CALIBRATION_TOL:
            raise ValueError(f"infeasible calibration: target means {mu.round(4).tolist()} are not a simplex point")
        return mu / mu.sum()

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SyntheticData:
    messages: pd.DataFrame
    prices: pd.DataFrame
    security_master: pd.DataFrame
    calendar: TradingCalendar
    low_frequency: pd.DataFrame
    index_members: list[str]
    truth: pd.DataFrame  # planted firm-day aggregates and returns
    config: SyntheticConfig
    seed: int


def _calendar(cfg: SyntheticConfig) -> TradingCalendar:
    bday = CustomBusinessDay(calendar=USFederalHolidayCalendar())
    days = pd.date_range(cfg.start_date, periods=cfg.burn_in + cfg.n_dates, freq=bday)
    return TradingCalendar([d.date() for d in days])


def _dirichlet(rng: np.random.Generator, alpha: np.ndarray) -> np.ndarray:
    g = rng.gamma(np.maximum(alpha, 1e-12))
    total = g.sum(axis=1, keepdims=True)
    # A row of all-underflowed draws falls back to its centre.
    bad = total[:, 0] <= 0
    if bad.any():
        g[bad] = alpha[bad]
        total[bad] = alpha[bad].sum(axis=1, keepdims=True)
    return g / total


def _sic_codes() -> dict[int, int]:
    """One representative SIC code per FF-12 industry."""
    reps = {1: 2000, 2: 3711, 3: 3560, 4: 1311, 5: 2810, 6: 3570, 7: 4810, 8: 4911, 9: 5311, 10: 2834,
            11: 6020, 12: 1000}
    for ind, sic in reps.items():
        assert map_ff12(sic) == ind
    return reps


def _tickers(n: int) -> np.ndarray:
    width = max(3, len(str(n)))
    return np.array([f"S{i:0{width}d}" for i in range(n)], dtype=object)


def _window_starts(cal: TradingCalendar, session: Session) -> tuple[np.ndarray, np.ndarray]:
    """UTC epoch seconds of each trading date's window start and its length in seconds."""
    starts, lengths = [], []
    for day in cal.dates:
        if session is Session.MARKET:
            a = dt.datetime.combine(day, cal.market_open, EASTERN)
            b = dt.datetime.combine(day, cal.market_close, EASTERN)
            starts.append(a.timestamp())
            lengths.append(b.timestamp() - a.timestamp() + 1)  # close itself is inside
        else:
            a, b = cal.session_bounds(day, Session.PRE_MARKET)
            starts.append(a.timestamp() + 1)  # the previous close belongs to the market session
            lengths.append(b.timestamp() - a.timestamp() - 1)
    return np.array(starts, dtype=np.int64), np.array(lengths, dtype=np.int64)


def generate_synthetic(cfg: SyntheticConfig, seed: int) -> SyntheticData:
    """Draw one synthetic data set; identical (cfg, seed) give identical output."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 20240101]))
    mu = cfg.target_means()
    cal = _calendar(cfg)
    n_f, n_d, burn = cfg.n_firms, cfg.n_dates, cfg.burn_in
    n_t = burn + n_d
    tickers = _tickers(n_f)
    k = len(EMOTIONS)

    # firms: industry (every industry at least once), index membership, activity
    industries = np.concatenate([np.arange(1, 13), rng.integers(1, 13, n_f - 12)])
    rng.shuffle(industries)
    reps = _sic_codes()
    sic = np.array([reps[i] for i in industries], dtype=np.int64)
    n_index = int(round(cfg.index_share * n_f))
    index_members = sorted(tickers[rng.permutation(n_f)[:n_index]].tolist())
    popular = rng.random(n_f) < cfg.popular_share
    rate = np.where(popular, cfg.popular_mean, cfg.extra_mean)

    # users
    followers = np.floor(np.exp(rng.normal(cfg.follower_log_mean, cfg.follower_log_sd, cfg.n_users))).astype(np.int64)
    followers[rng.random(cfg.n_users) < cfg.zero_follower_share] = 0
    user_exp = rng.choice(len(EXPERIENCE), cfg.n_users, p=[0.35, 0.3, 0.2, 0.15])
    user_app = rng.choice(len(APPROACH), cfg.n_users, p=[0.25, 0.1, 0.2, 0.1, 0.1, 0.05, 0.2])
    user_hor = rng.choice(len(HORIZON), cfg.n_users, p=[0.2, 0.25, 0.2, 0.15, 0.2])

    # emotion hierarchy: firm means, then firm-day means per session
    firm_mu = _dirichlet(rng, np.tile(cfg.firm_concentration * mu, (n_f, 1)))
    sessions = [Session.PRE_MARKET] + ([Session.MARKET] if cfg.market_messages else [])
    parts, aggregates = [], {}
    next_id = 0
    for session in sessions:
        fd_mu = _dirichlet(rng, cfg.day_concentration * np.repeat(firm_mu, n_d, axis=0))  # firm-major
        counts = cfg.message_floor + rng.poisson(np.repeat(rate, n_d))
        n_msg = int(counts.sum())
        fd = np.repeat(np.arange(n_f * n_d), counts)
        emo = _dirichlet(rng, cfg.message_concentration * fd_mu[fd])
        users = rng.integers(0, cfg.n_users, n_msg)
        w = follower_weights(followers[users])
        wsum = np.bincount(fd, weights=w, minlength=n_f * n_d)
        agg = np.column_stack([np.bincount(fd, weights=w * emo[:, j], minlength=n_f * n_d) for j in range(k)])
        aggregates[session] = agg / wsum[:, None]

        firm = fd // n_d
        day = burn + fd % n_d
        start, length = _window_starts(cal, session)
        epoch = start[day] + (rng.random(n_msg) * length[day]).astype(np.int64)
        template = rng.integers(0, len(ORGANIC_TEMPLATES), n_msg)
        frame = pd.DataFrame({
            "id": np.arange(next_id, next_id + n_msg, dtype=np.int64),
            "user_id": users,
            "timestamp": pd.to_datetime(epoch, unit="s", utc=True),
            "body": pd.Categorical.from_codes(template, categories=list(ORGANIC_TEMPLATES)),
            "ticker": pd.Categorical.from_codes(firm, categories=tickers),
            "n_cashtags": np.ones(n_msg, dtype=np.int64),
            "follower_count": followers[users],
            "is_retweet": rng.random(n_msg) < cfg.retweet_share,
            "has_url": (rng.random(n_msg) < cfg.url_share) | _TEMPLATE_LINK[template],
            "likes": rng.poisson(2.0, n_msg),
            "user_experience": pd.Categorical.from_codes(user_exp[users], categories=EXPERIENCE),
            "user_approach": pd.Categorical.from_codes(user_app[users], categories=APPROACH),
            "user_horizon": pd.Categorical.from_codes(user_hor[users], categories=HORIZON),
            "sentiment_tag": pd.Categorical.from_codes(np.full(n_msg, 2), categories=SENTIMENT),
        })
        next_id += n_msg
        for j, col in enumerate(EMO_COLS):
            frame[col] = emo[:, j]
        if cfg.alternative_emotions:
            alt = _dirichlet(rng, cfg.alt_concentration * emo + 0.01)
            for j, col in enumerate(ALT_COLS):
                frame[col] = alt[:, j]
        else:
            for col in ALT_COLS:
                frame[col] = np.nan
        parts.append(frame)

    organic = pd.concat(parts, ignore_index=True)
    organic["ticker2"] = ""
    noise = _noise_messages(cfg, rng, cal, tickers, next_id)
    messages = pd.concat([organic, noise], ignore_index=True) if len(noise) else organic

    prices, truth = _returns(cfg, rng, cal, tickers, sic, aggregates)
    master = pd.DataFrame({"ticker": tickers, "secstat": "A", "tpci": "0",
                           "exchg": rng.choice([11, 12, 14], n_f), "sic": sic})
    if cfg.inactive_ticker_messages:
        master = pd.concat([master, pd.DataFrame({"ticker": ["ZZDEAD"], "secstat": ["I"], "tpci": ["0"],
                                                  "exchg": [11], "sic": [9999]})], ignore_index=True)
    lowfreq = _low_frequency(rng, cal, tickers)
    return SyntheticData(messages, prices, master, cal, lowfreq, index_members, truth, cfg, int(seed))


def _noise_messages(cfg: SyntheticConfig, rng: np.random.Generator, cal: TradingCalendar, tickers: np.ndarray,
                    next_id: int) -> pd.DataFrame:
    """Messages the restrictions must remove: bot repeats, multi-ticker posts, an inactive ticker."""
    start, length = _window_starts(cal, Session.PRE_MARKET)
    n_bot = cfg.n_bots * cfg.bot_posts
    n_multi = cfg.multi_ticker_messages
    n = n_bot + n_multi + cfg.inactive_ticker_messages
    if n == 0:
        return pd.DataFrame()
    day = cfg.burn_in + rng.integers(0, cfg.n_dates, n)
    epoch = start[day] + (rng.random(n) * length[day]).astype(np.int64)
    ticker = tickers[rng.integers(0, len(tickers), n)].astype(object)
    body = np.array(ORGANIC_TEMPLATES, dtype=object)[rng.integers(0, len(ORGANIC_TEMPLATES), n)]
    user = rng.integers(0, cfg.n_users, n)
    for b in range(cfg.n_bots):
        sl = slice(b * cfg.bot_posts, (b + 1) * cfg.bot_posts)
        user[sl] = cfg.n_users + b  # ids past the organic range
        body[sl] = BOT_TEXT
    # multi-ticker posts: empty firm ticker, both tags kept for the file writer
    multi = slice(n_bot, n_bot + n_multi)
    n_tags = np.ones(n, dtype=np.int64)
    n_tags[multi] = 2
    tags = np.full(n, "", dtype=object)
    second = tickers[rng.integers(0, len(tickers), n_multi)]
    tags[multi] = [f"{a},{b if b != a else 'ZZDEAD'}" for a, b in zip(ticker[multi], second)]
    ticker[multi] = ""
    ticker[n_bot + n_multi:] = "ZZDEAD"
    emo = _dirichlet(rng, np.tile(2.0 * cfg.target_means(), (n, 1)))
    frame = pd.DataFrame({
        "id": np.arange(next_id, next_id + n, dtype=np.int64),
        "user_id": user,
        "timestamp": pd.to_datetime(epoch, unit="s", utc=True),
        "body": body,
        "ticker": ticker,
        "n_cashtags": n_tags,
        "follower_count": np.zeros(n, dtype=np.int64),
        "is_retweet": np.zeros(n, dtype=bool),
        "has_url": np.zeros(n, dtype=bool),
        "likes": np.zeros(n, dtype=np.int64),
        "user_experience": "unknown",
        "user_approach": "unknown",
        "user_horizon": "unknown",
        "sentiment_tag": "unclassified",
    })
    for j, col in enumerate(EMO_COLS):
        frame[col] = emo[:, j]
    for col in ALT_COLS:
        frame[col] = np.nan
    frame["ticker2"] = tags
    return frame


def _returns(cfg: SyntheticConfig, rng: np.random.Generator, cal: TradingCalendar, tickers: np.ndarray,
             sic: np.ndarray, aggregates: dict) -> tuple[pd.DataFrame, pd.DataFrame]:
    n_f, n_d, burn = cfg.n_firms, cfg.n_dates, cfg.burn_in
    n_t = burn + n_d
    beta = np.array([cfg.beta.get(e, 0.0) for e in EMOTIONS])
    mbeta = np.array([cfg.market_beta.get(e, 0.0) for e in EMOTIONS])
    signal = np.zeros((n_f, n_t))
    pre = aggregates[Session.PRE_MARKET].reshape(n_f, n_d, -1)
    signal[:, burn:] += pre @ beta
    if Session.MARKET in aggregates:
        mkt = aggregates[Session.MARKET].reshape(n_f, n_d, -1)
        signal[:, burn:] += mkt @ mbeta
    firm_fe = rng.normal(0.0, cfg.firm_fe_sd, n_f)
    date_fe = rng.normal(0.0, cfg.date_fe_sd, n_t)
    ret_co = rng.normal(0.0, cfg.ret_co_sd, (n_f, n_t))
    eps = rng.normal(0.0, cfg.noise_sd, (n_f, n_t))
    ret_oc = np.empty((n_f, n_t))
    prev = np.zeros(n_f)
    base = firm_fe[:, None] + date_fe[None, :] + signal + cfg.zeta_co * ret_co + eps
    for t in range(n_t):
        prev = base[:, t] + cfg.gamma * prev
        ret_oc[:, t] = prev
    ret_oc = np.clip(ret_oc, -0.9, 3.0)
    ret_co = np.clip(ret_co, -0.9, 3.0)
    gross = (1.0 + ret_co) * (1.0 + ret_oc)
    start = np.exp(rng.normal(3.5, 0.8, n_f))
    close = start[:, None] * np.cumprod(gross, axis=1)
    open_ = close / (1.0 + ret_oc)
    shares = np.floor(np.exp(rng.normal(17.5, 1.2, n_f)))
    volume = np.floor(shares[:, None] * np.exp(rng.normal(-5.0, 0.8, (n_f, n_t))))

    dates = pd.DatetimeIndex(pd.to_datetime(cal.dates))
    prices = pd.DataFrame({
        "ticker": np.repeat(tickers, n_t),
        "date": np.tile(dates, n_f),
        "open": open_.ravel(),
        "close": close.ravel(),
        "shares_outstanding": np.repeat(shares, n_t).astype(np.int64),
        "share_volume": volume.ravel().astype(np.int64),
        "sic": np.repeat(sic, n_t),
    })
    truth = pd.DataFrame({
        "ticker": np.repeat(tickers, n_d),
        "date": np.tile(dates[burn:], n_f),
        "ret_oc": ret_oc[:, burn:].ravel(),
        "firm_fe": np.repeat(firm_fe, n_d),
        "date_fe": np.tile(date_fe[burn:], n_f),
    })
    for j, e in enumerate(EMOTIONS):
        truth[f"pre_{e}"] = pre[:, :, j].ravel()
    return prices, truth


def _low_frequency(rng: np.random.Generator, cal: TradingCalendar, tickers: np.ndarray) -> pd.DataFrame:
    dates = pd.DatetimeIndex(pd.to_datetime(cal.dates))
    frames = []
    for kind, step, a, b in (("short_interest", 10, 1.2, 14.0), ("institutional_ownership", 63, 2.5, 2.5)):
        as_of = dates[::step]
        n = len(tickers) * len(as_of)
        frames.append(pd.DataFrame({
            "ticker": np.repeat(tickers, len(as_of)),
            "as_of_date": np.tile(as_of, len(tickers)),
            "kind": kind,
            "value": rng.beta(a, b, n),
        }))
    return pd.concat(frames, ignore_index=True)


# ---------------------------------------------------------------------------
# files


def _iso_eastern(ts: pd.Series) -> list[str]:
    local = ts.dt.tz_convert(EASTERN)
    text = local.dt.strftime("%Y-%m-%dT%H:%M:%S%z")
    return [s[:-2] + ":" + s[-2:] for s in text]


def _emotion_lists(frame: pd.DataFrame, cols: list[str]) -> list:
    values = frame[cols].to_numpy(float)
    missing = np.isnan(values).any(axis=1)
    return [None if m else [float(f"{v:.9f}") for v in row] for row, m in zip(values, missing)]


def write_messages(messages: pd.DataFrame, path: str | Path) -> int:
    """Line-delimited message file, in id order, with Eastern-time offsets."""
    frame = messages.sort_values("id", kind="mergesort")
    stamps = _iso_eastern(frame["timestamp"])
    emos = _emotion_lists(frame, EMO_COLS)
    alts = _emotion_lists(frame, ALT_COLS)
    cols = ["id", "user_id", "body", "ticker", "ticker2", "follower_count", "is_retweet", "has_url", "likes",
            "user_experience", "user_approach", "user_horizon", "sentiment_tag"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (mid, user, body, ticker, ticker2, foll, rt, url, likes, exp, app, hor, sent), ts, emo, alt in zip(
                frame[cols].itertuples(index=False, name=None), stamps, emos, alts):
            tags = ticker2.split(",") if ticker2 else [ticker]
            rec = {
                "id": f"m{mid}", "user_id": f"u{user}", "timestamp": ts, "body": body, "cashtags": tags,
                "follower_count": int(foll), "is_retweet": bool(rt),
                "urls": ["https://example.com/x"] if url and "http" not in body and "www" not in body else [],
                "likes": int(likes), "user_experience": exp, "user_approach": app, "user_horizon": hor,
                "emotion": emo, "sentiment_tag": sent,
            }
            if alt is not None:
                rec["emotion_alt"] = alt
            fh.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")
    return len(frame)


INPUT_FILES = {
    "messages": "messages.jsonl",
    "prices": "prices.csv",
    "security_master": "security_master.csv",
    "calendar": "calendar.txt",
    "low_frequency": "low_frequency.csv",
    "index_members": "index_members.txt",
}


def write_synthetic(data: SyntheticData, out_dir: str | Path | None = None,
                    paths: dict[str, str | Path] | None = None) -> dict[str, Path]:
    """Write every input file the pipeline reads; returns their paths by role.

    Files go to `out_dir` under their default names unless `paths` maps a
    role (``messages``, ``prices``, ...) to a specific location.
    """
    if out_dir is None and paths is None:
        raise ValueError("need out_dir or paths")
    resolved = {role: Path(out_dir) / name for role, name in INPUT_FILES.items()} if out_dir is not None else {}
    resolved.update({role: Path(p) for role, p in (paths or {}).items()})
    missing = set(INPUT_FILES) - set(resolved)
    if missing:
        raise ValueError(f"no destination for {sorted(missing)}")
    for path in resolved.values():
        path.parent.mkdir(parents=True, exist_ok=True)
    paths = resolved
    write_messages(data.messages, paths["messages"])
    csv = {"index": False, "lineterminator": "\n", "float_format": "%.10g", "date_format": "%Y-%m-%d"}
    data.prices.to_csv(paths["prices"], **csv)
    data.security_master.to_csv(paths["security_master"], **csv)
    data.calendar.to_file(paths["calendar"])
    data.low_frequency.to_csv(paths["low_frequency"], **csv)
    paths["index_members"].write_text("".join(f"{t}\n" for t in data.index_members), encoding="utf-8")
    return paths
