import math
from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest

from emopanel.emotions import EMOTIONS, EmotionTuple
from emopanel.panel import (Panel, aggregate_emotions, aggregate_frame, assemble_panel, compute_valence,
                            emotion_column, follower_weights, make_percentile_dummy, winsorize)
from emopanel.sessions import TradingCalendar

HAPPY, NEUTRAL = EmotionTuple.pure("happy"), EmotionTuple.pure("neutral")
TABLE2_MEANS = EmotionTuple(neutral=0.511, happy=0.246, sad=0.036, anger=0.024, disgust=0.037, surprise=0.062,
                            fear=0.085)

# ---------------------------------------------------------------------------
# weighting and aggregation


def test_follower_weight_formula():
    np.testing.assert_allclose(follower_weights([0, 1, 99]), [1.0, 1 + math.log(2), 1 + math.log(100)])


def test_single_message_is_its_own_aggregate():
    t = EmotionTuple.from_sequence([0.1, 0.2, 0.3, 0.1, 0.1, 0.1, 0.1])
    np.testing.assert_allclose(aggregate_emotions([t], follower_counts=[55]).as_list(), t.as_list(), atol=1e-15)


def test_follower_weighted_two_message_example():
    out = aggregate_emotions([HAPPY, NEUTRAL], "follower", follower_counts=[0, 1])
    # weights 1 and 1 + ln 2
    assert out.happy == pytest.approx(1 / (2 + math.log(2)), abs=1e-12)
    assert out.neutral == pytest.approx((1 + math.log(2)) / (2 + math.log(2)), abs=1e-12)
    assert round(out.happy, 4) == 0.3713 and round(out.neutral, 4) == 0.6287


def test_equal_weighted_two_message_example():
    out = aggregate_emotions([HAPPY, NEUTRAL], "equal", follower_counts=[0, 1])
    assert (out.happy, out.neutral) == (0.5, 0.5)


def test_message_objects_accepted():
    msgs = [SimpleNamespace(emotion=HAPPY, follower_count=0), SimpleNamespace(emotion=NEUTRAL, follower_count=0)]
    assert aggregate_emotions(msgs).happy == 0.5


def test_aggregation_errors():
    with pytest.raises(ValueError, match="empty"):
        aggregate_emotions([])
    with pytest.raises(ValueError, match="emotion tuple"):
        aggregate_emotions([SimpleNamespace(emotion=None, follower_count=1)])
    with pytest.raises(ValueError, match="weight_mode"):
        aggregate_emotions([HAPPY], "likes", follower_counts=[1])


# ---------------------------------------------------------------------------
# valence


def test_valence_examples():
    assert compute_valence(HAPPY) == 1.0
    assert compute_valence(NEUTRAL) == 0.0
    assert compute_valence(EmotionTuple.pure("fear")) == -1.0
    # .246 - .036 - .024 - .037 - .085
    assert compute_valence(TABLE2_MEANS) == pytest.approx(0.064, abs=5e-4)
    assert compute_valence({"happy": 0.5, "sad": 0.1, "anger": 0, "disgust": 0, "fear": 0.1}) == pytest.approx(0.3)


# ---------------------------------------------------------------------------
# winsorization


def sort_oracle(x, q, method):
    """Order statistic by hand from a full sort."""
    s = np.sort(x[~np.isnan(x)])
    pos = (len(s) - 1) * q
    if method == "nearest":
        return s[int(math.floor(pos + 0.5))]
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (pos - lo) * (s[hi] - s[lo])


@pytest.mark.parametrize("method", ["nearest", "linear"])
def test_winsorize_matches_sort_oracle_on_10k_points(method):
    rng = np.random.default_rng(5)
    x = rng.standard_t(2, size=10_000)
    x[[17, 4242]] = [-1e6, 1e6]  # known extremes
    out = winsorize(x, 0.001, 0.999, method=method)
    lo, hi = sort_oracle(x, 0.001, method), sort_oracle(x, 0.999, method)
    np.testing.assert_array_equal(out, np.clip(x, lo, hi))
    assert out[17] == lo and out[4242] == hi


def test_winsorize_is_idempotent():
    rng = np.random.default_rng(6)
    x = rng.lognormal(size=10_000)
    once = winsorize(x)
    np.testing.assert_array_equal(winsorize(once), once)


def test_winsorize_edge_cases():
    np.testing.assert_array_equal(winsorize(np.full(10, 3.0)), np.full(10, 3.0))
    out = winsorize(pd.Series([1.0, np.nan, 2.0], name="v"), 0.0, 1.0)
    assert isinstance(out, pd.Series) and out.name == "v" and np.isnan(out.iloc[1])
    with pytest.raises(ValueError, match="all-missing"):
        winsorize(np.array([np.nan, np.nan]))
    with pytest.raises(ValueError, match="lower < upper"):
        winsorize(np.arange(5.0), 0.999, 0.001)
    with pytest.raises(ValueError, match="method"):
        winsorize(np.arange(5.0), method="midpoint")


# ---------------------------------------------------------------------------
# percentile dummies


def test_percentile_dummy_examples():
    x = np.arange(1.0, 101.0)  # Q(0.25) = 25.75, Q(0.75) = 75.25, median 50.5
    below = make_percentile_dummy(x, 25, "below")
    assert below[9] == 1.0 and below[25] == 0.0  # 10 is strictly below
    above = make_percentile_dummy(x, 75, "above")
    assert above[49] == 0.0 and above[50] == 0.0  # median values
    assert above.sum() == 25


def test_percentile_dummy_tie_is_inclusive():
    x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])  # Q(0.25) = 2 exactly
    np.testing.assert_array_equal(make_percentile_dummy(x, 25, "below"), [1, 1, 0, 0, 0])
    np.testing.assert_array_equal(make_percentile_dummy(x, 75, "above"), [0, 0, 0, 1, 1])


def test_percentile_dummy_missing_and_validation():
    out = make_percentile_dummy(pd.Series([1.0, np.nan, 3.0]), 25, "below")
    assert np.isnan(out.iloc[1])
    with pytest.raises(ValueError, match="side"):
        make_percentile_dummy([1.0], 25, "middle")


# ---------------------------------------------------------------------------
# firm-day aggregation


def _kept(rng, n=400):
    emo = rng.dirichlet(np.ones(7), size=n)
    frame = pd.DataFrame(emo, columns=[f"emo_{e}" for e in EMOTIONS])
    frame["ticker"] = rng.choice(["AAA", "BBB", "CCC"], n)
    frame["trading_date"] = pd.Timestamp("2021-01-04") + pd.to_timedelta(rng.integers(0, 3, n), unit="D")
    frame["session"] = rng.choice(["pre", "mkt"], n)
    frame["follower_count"] = rng.integers(0, 5000, n)
    frame["chat_class"] = rng.choice(["finance", "chat"], n)
    return frame


def test_aggregate_frame_matches_per_group_oracle():
    rng = np.random.default_rng(7)
    kept = _kept(rng)
    agg = aggregate_frame(kept, splits=("all", "finance"), alternative=False)
    assert list(agg[["ticker", "date"]].itertuples(index=False)) == sorted(agg[["ticker", "date"]].itertuples(index=False))
    for (ticker, day, sess), g in kept.groupby(["ticker", "trading_date", "session"]):
        row = agg[(agg["ticker"] == ticker) & (agg["date"] == day)].iloc[0]
        tuples = [EmotionTuple.from_sequence(v) for v in g[[f"emo_{e}" for e in EMOTIONS]].to_numpy()]
        expected = aggregate_emotions(tuples, "follower", follower_counts=g["follower_count"].tolist())
        got = [row[emotion_column(sess, "all", e)] for e in EMOTIONS]
        np.testing.assert_allclose(got, expected.as_list(), rtol=0, atol=1e-12)
        eq = aggregate_emotions(tuples, "equal", follower_counts=g["follower_count"].tolist())
        np.testing.assert_allclose([row[emotion_column(sess, "all", e, "eq")] for e in EMOTIONS], eq.as_list(),
                                   atol=1e-12)
        assert row[emotion_column(sess, "all", "n")] == len(g)
        assert row[emotion_column(sess, "all", "valence")] == pytest.approx(compute_valence(expected), abs=1e-12)
        fin = g[g["chat_class"] == "finance"]
        assert row[emotion_column(sess, "finance", "n")] == len(fin)


def test_aggregates_lie_on_the_simplex():
    agg = aggregate_frame(_kept(np.random.default_rng(8)), splits=("all",), alternative=False)
    for sess in ("pre", "mkt"):
        block = agg[[emotion_column(sess, "all", e) for e in EMOTIONS]].to_numpy()
        block = block[~np.isnan(block).any(axis=1)]
        np.testing.assert_allclose(block.sum(axis=1), 1.0, atol=1e-9)
        assert block.min() >= 0.0 and block.max() <= 1.0


def test_empty_split_is_missing_with_zero_count():
    kept = _kept(np.random.default_rng(9), n=30).assign(chat_class="chat")
    agg = aggregate_frame(kept, splits=("finance",))
    assert agg["pre_finance_happy"].isna().all() and (agg["pre_finance_n"] == 0).all()


def test_alternative_source_columns():
    rng = np.random.default_rng(10)
    kept = _kept(rng, 50)
    alt = rng.dirichlet(np.ones(7), size=50)
    for j, e in enumerate(EMOTIONS):
        kept[f"alt_{e}"] = alt[:, j]
    agg = aggregate_frame(kept, splits=("all",))
    assert "pre_all_alt_fear" in agg and "pre_all_alt_n" not in agg


def test_unknown_split_and_missing_label_column():
    kept = _kept(np.random.default_rng(11), 10)
    with pytest.raises(ValueError, match="unknown split"):
        aggregate_frame(kept, splits=("weekend",))
    with pytest.raises(ValueError, match="horizon_bucket"):
        aggregate_frame(kept, splits=("short_horizon",))


# ---------------------------------------------------------------------------
# assembly


def _controls(tickers, dates):
    idx = pd.MultiIndex.from_product([tickers, pd.to_datetime(dates)], names=["ticker", "date"]).to_frame(index=False)
    idx["ret_oc"] = np.arange(len(idx), dtype=float)
    return idx


def test_leads_follow_the_calendar():
    dates = ["2021-01-04", "2021-01-05", "2021-01-06", "2021-01-07", "2021-01-08", "2021-01-11"]
    cal = TradingCalendar(dates)
    controls = _controls(["AAA"], dates)
    agg = controls[["ticker", "date"]].assign(pre_all_happy=0.3)
    panel = assemble_panel(agg, controls, cal)
    d = panel.data
    np.testing.assert_array_equal(d["ret_oc_lead1"].to_numpy()[:-1], d["ret_oc"].to_numpy()[1:])
    # Friday's first lead is Monday
    assert d.loc[d["date"] == "2021-01-08", "ret_oc_lead1"].item() == d.loc[d["date"] == "2021-01-11", "ret_oc"].item()
    last = d.iloc[-1]
    assert all(np.isnan(last[f"ret_oc_lead{k}"]) for k in range(1, 5))
    assert d["ret_oc_lead4"].iloc[0] == d["ret_oc"].iloc[4]


def test_missing_bar_gives_missing_lead():
    dates = ["2021-01-04", "2021-01-05", "2021-01-06"]
    controls = _controls(["AAA"], dates).drop(index=1)  # no bar on Jan 5
    panel = assemble_panel(controls[["ticker", "date"]], controls, TradingCalendar(dates))
    assert np.isnan(panel.data["ret_oc_lead1"].iloc[0])
    assert panel.data["ret_oc_lead2"].iloc[0] == controls["ret_oc"].iloc[1]


def test_inner_join_counts():
    dates = ["2021-01-04", "2021-01-05", "2021-01-06", "2021-01-07", "2021-01-08"]
    agg = pd.DataFrame({"ticker": "AAA", "date": pd.to_datetime(dates), "pre_all_happy": 0.2})
    controls = _controls(["AAA"], dates[:3])
    assert len(assemble_panel(agg, controls, TradingCalendar(dates))) == 3


def test_duplicate_keys_rejected():
    dates = ["2021-01-04"]
    controls = _controls(["AAA"], dates)
    with pytest.raises(ValueError, match="duplicate"):
        assemble_panel(pd.concat([controls, controls]), controls, TradingCalendar(dates))
    with pytest.raises(ValueError, match="duplicate"):
        Panel(pd.concat([controls, controls]))


def test_panel_csv_round_trip(tmp_path):
    data = _controls(["AAA", "BBB"], ["2021-01-04", "2021-01-05"])
    panel = Panel(data)
    panel.describe_column("ret_oc", "open-close return", "fraction", winsorized=True)
    sidecar = panel.to_csv(tmp_path / "panel.csv")
    assert sidecar.name == "panel.meta.json"
    back = Panel.from_csv(tmp_path / "panel.csv")
    pd.testing.assert_frame_equal(back.data, panel.data)
    assert back.meta["ret_oc"] == {"description": "open-close return", "units": "fraction", "winsorized": True}


def test_built_panel_contract(small_panel):
    d = small_panel.data
    assert not d.duplicated(["ticker", "date"]).any()
    assert {"in_index", "year", "short_interest", "inst_own", "ff12", "ret_oc_lead4"} <= set(d.columns)
    # the "all" split always has at least ten messages where present
    present = d["pre_all_n"] > 0
    assert (d.loc[present, "pre_all_n"] >= 10).all()
    block = d.loc[present, [emotion_column("pre", "all", e) for e in EMOTIONS]].to_numpy()
    np.testing.assert_allclose(block.sum(axis=1), 1.0, atol=1e-9)
    valence = d.loc[present, "pre_all_valence"]
    assert valence.between(-1, 1).all()
    assert all(c in small_panel.meta for c in d.columns if c not in ("ticker", "date"))
