"""Table artifacts: estimation runs and their CSV / Markdown renderings."""

from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from ..econ.demean import DemeanConfig, within_sd
from ..econ.labtests import lab_tests
from ..econ.ols import FitResult, MissingColumnError, fit_hdfe_ols
from ..econ.stats import corr_bonferroni
from ..market import ff12_table
from ..panel import Panel, emotion_column, make_percentile_dummy, winsorize
from .catalog import (CORR_COLUMNS, REGRESSION_TABLES, SUMMARY_ROWS, TITLES, ColumnSpec, StudyConfig,
                      build_columns, required_columns)

REGRESSION_STARS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))
CORR_STARS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))
FLAG_LABELS = {"index": "Index members", "min_messages": "At least {n} messages"}


def stars(p: float, thresholds=REGRESSION_STARS) -> str:
    """Significance marker for p; empty for p above every threshold or missing."""
    if p is None or not np.isfinite(p):
        return ""
    for cut, mark in thresholds:
        if p < cut:
            return mark
    return ""


@dataclass
class Cell:
    label: str
    term: str
    estimate: float
    se: float
    p_value: float

    @property
    def stars(self) -> str:
        return stars(self.p_value)


@dataclass
class RegressionColumn:
    label: str
    cells: list[Cell]
    n_obs: int
    r_squared: float
    within_sd: float
    panel: str = ""
    block: str = ""
    flags: tuple[str, ...] = ()
    dependent: str = ""
    controls: tuple[str, ...] = ()


@dataclass
class TableArtifact:
    """One table: regression columns, or a descriptive grid.

    Regression tables fill `columns`; descriptive tables (summary,
    correlation, laboratory and appendix tables) fill `grid`.
    """

    table_id: str
    title: str
    columns: list[RegressionColumn] = field(default_factory=list)
    grid: pd.DataFrame | None = None
    notes: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "regression" if self.table_id in REGRESSION_TABLES else "grid"

    @property
    def panels(self) -> list[str]:
        return list(dict.fromkeys(c.panel for c in self.columns))

    def schema(self) -> dict:
        """Structure without numbers, for snapshot comparison."""
        if self.kind == "grid":
            return {"table_id": self.table_id, "kind": "grid", "columns": list(self.grid.columns),
                    "n_rows": len(self.grid)}
        return {
            "table_id": self.table_id,
            "kind": "regression",
            "columns": [{"label": c.label, "panel": c.panel, "block": c.block, "flags": list(c.flags),
                         "rows": [cell.label for cell in c.cells]} for c in self.columns],
        }

    def to_dict(self) -> dict:
        out = {"table_id": self.table_id, "title": self.title, "notes": self.notes,
               "columns": [asdict(c) for c in self.columns], "grid": None}
        if self.grid is not None:
            out["grid"] = self.grid.to_dict(orient="split", index=False)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TableArtifact":
        columns = [RegressionColumn(**{**c, "cells": [Cell(**x) for x in c["cells"]], "flags": tuple(c["flags"]),
                                       "controls": tuple(c["controls"])}) for c in d["columns"]]
        grid = None
        if d.get("grid") is not None:
            grid = pd.DataFrame(d["grid"]["data"], columns=d["grid"]["columns"])
        return cls(d["table_id"], d["title"], columns=columns, grid=grid, notes=d.get("notes", {}))

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per estimate plus N, R2 and within-SD rows per column."""
        if self.kind == "grid":
            return self.grid.copy()
        rows = []
        for c in self.columns:
            key = {"panel": c.panel, "block": c.block, "column": c.label}
            for cell in c.cells:
                rows.append({**key, "row": cell.label, "term": cell.term, "estimate": cell.estimate,
                             "se": cell.se, "p_value": cell.p_value, "stars": cell.stars})
            for name, value in (("N", c.n_obs), ("R2", c.r_squared), ("Within SD", c.within_sd)):
                rows.append({**key, "row": name, "term": "", "estimate": value, "se": np.nan,
                             "p_value": np.nan, "stars": ""})
        return pd.DataFrame(rows, columns=["panel", "block", "column", "row", "term", "estimate", "se",
                                           "p_value", "stars"])


# ---------------------------------------------------------------------------
# runners


def _check_columns(study: StudyConfig, data: pd.DataFrame) -> None:
    for col in required_columns(study):
        if col not in data.columns:
            raise MissingColumnError(col, f"study {study.table_id}: ")


def _fit_column(col: ColumnSpec, data: pd.DataFrame, demean_cfg: DemeanConfig | None) -> FitResult:
    if col.dummy is None:
        return fit_hdfe_ols(col.spec, data, demean_cfg)
    source, p, side = col.dummy
    # thresholds come from the pooled estimation sample of this column
    needed = [c for c in col.spec.base_columns if c != "iv"] + ["ticker", "date", "ff12", source]
    sample = data[list(dict.fromkeys(needed))].dropna()
    frame = sample.assign(iv=make_percentile_dummy(sample[source], p, side))
    return fit_hdfe_ols(col.spec, frame, demean_cfg)


def _regression_table(study: StudyConfig, data: pd.DataFrame, demean_cfg) -> TableArtifact:
    columns = []
    for col in build_columns(study):
        fit = _fit_column(col, data, demean_cfg)
        se, p = fit.std_errors, fit.p_values
        cells = [Cell(label, term, float(fit.coefficients[term]), float(se[term]), float(p[term]))
                 for label, term in col.rows]
        shown = {term for _, term in col.rows}
        columns.append(RegressionColumn(
            label=col.label, cells=cells, n_obs=fit.n_obs, r_squared=fit.r_squared,
            within_sd=fit.within_sd_dependent, panel=col.panel, block=col.block, flags=col.flags,
            dependent=col.spec.dependent, controls=tuple(r for r in col.spec.regressors if r not in shown)))
    notes = {"fixed_effects": "ticker, date", "clusters": "ff12, date", "stars": "* p<0.10, ** p<0.05, *** p<0.01",
             "min_messages": study.min_messages}
    return TableArtifact(study.table_id, TITLES[study.table_id], columns=columns, notes=notes)


def _winsorized(values: pd.Series, limits) -> np.ndarray:
    v = values.to_numpy(float)
    return winsorize(v, *limits) if np.isfinite(v).any() else v


def summary_table(study: StudyConfig, data: pd.DataFrame, demean_cfg=None) -> TableArtifact:
    """Mean, standard deviation and firm/date-demeaned standard deviation per variable."""
    rows = []
    for panel, label, col in SUMMARY_ROWS:
        sub = data[[col, "ticker", "date"]].dropna()
        if len(sub) < 2:
            mean = sd = wsd = float("nan")
        else:
            v = _winsorized(sub[col], study.winsor_limits)
            mean, sd = float(v.mean()), float(v.std(ddof=1))
            wsd = within_sd(v, sub["ticker"].to_numpy(), sub["date"].to_numpy(), demean_cfg)
        rows.append({"panel": panel, "variable": label, "column": col, "mean": mean, "sd": sd,
                     "within_sd": wsd, "n_obs": len(sub)})
    return TableArtifact(study.table_id, TITLES[study.table_id], grid=pd.DataFrame(rows),
                         notes={"observations": len(data)})


def corr_table(study: StudyConfig, data: pd.DataFrame) -> TableArtifact:
    """Lower-triangle pairwise correlations with Bonferroni-adjusted p-values."""
    labels = [label for label, _ in CORR_COLUMNS]
    frame = pd.DataFrame({label: _winsorized(data[col], study.winsor_limits) for label, col in CORR_COLUMNS})
    corr, p_adj = corr_bonferroni(frame)
    rows = []
    for i, a in enumerate(labels):
        for b in labels[:i]:
            p = float(p_adj.loc[a, b])
            rows.append({"row": a, "column": b, "correlation": float(corr.loc[a, b]), "p_adj": p,
                         "stars": stars(p, CORR_STARS)})
    return TableArtifact(study.table_id, TITLES[study.table_id], grid=pd.DataFrame(rows),
                         notes={"observations": len(data), "tests": len(rows),
                                "stars": "* p<0.05, ** p<0.01, *** p<0.001"})


def lab_table(study: StudyConfig, data: pd.DataFrame, demean_cfg=None) -> TableArtifact:
    grid = lab_tests(data, winsor=study.winsor_limits, demean_cfg=demean_cfg)
    grid.insert(0, "panel", np.where(grid["finding"].isin(["I", "II"]), "A", "B"))
    return TableArtifact(study.table_id, TITLES[study.table_id], grid=grid)


def _posts(data: pd.DataFrame) -> pd.Series:
    n = [data[emotion_column(s, "all", "n")].fillna(0) for s in ("pre", "mkt")]
    return (n[0] + n[1]).astype(np.int64)


def year_table(study: StudyConfig, data: pd.DataFrame) -> TableArtifact:
    grid = (data.assign(posts=_posts(data)).groupby("year", sort=True)
            .agg(firm_days=("ticker", "size"), posts=("posts", "sum")).reset_index())
    total = pd.DataFrame({"year": ["Total"], "firm_days": [int(grid["firm_days"].sum())],
                          "posts": [int(grid["posts"].sum())]})
    grid = pd.concat([grid.astype({"year": str}), total], ignore_index=True)
    return TableArtifact(study.table_id, TITLES[study.table_id], grid=grid, notes={"observations": len(data)})


def industry_table(study: StudyConfig, data: pd.DataFrame) -> TableArtifact:
    names = dict(ff12_table()[["industry", "name"]].drop_duplicates().itertuples(index=False))
    names.setdefault(12, "Other")
    counts = (data.assign(posts=_posts(data)).groupby("ff12")
              .agg(firm_days=("ticker", "size"), posts=("posts", "sum"))
              .reindex(range(1, 13), fill_value=0))
    grid = pd.DataFrame({
        "ff12": range(1, 13),
        "industry": [names.get(i, str(i)) for i in range(1, 13)],
        "posts": counts["posts"].to_numpy(np.int64),
        "posts_pct": 100.0 * counts["posts"].to_numpy() / max(counts["posts"].sum(), 1),
        "firm_days": counts["firm_days"].to_numpy(np.int64),
        "firm_days_pct": 100.0 * counts["firm_days"].to_numpy() / max(len(data), 1),
    })
    return TableArtifact(study.table_id, TITLES[study.table_id], grid=grid, notes={"observations": len(data)})


def run_table(study: StudyConfig, panel, demean_cfg: DemeanConfig | None = None) -> TableArtifact:
    """Estimate or tabulate one study on a panel.

    Raises :class:`MissingColumnError` naming the study and the first
    column the panel lacks.
    """
    data = panel.data if isinstance(panel, Panel) else panel
    _check_columns(study, data)
    t = study.table_id
    if t in REGRESSION_TABLES:
        return _regression_table(study, data, demean_cfg)
    if t == "T2":
        return summary_table(study, data, demean_cfg)
    if t == "T3corr":
        return corr_table(study, data)
    if t == "T3":
        return lab_table(study, data, demean_cfg)
    if t == "A2":
        return year_table(study, data)
    return industry_table(study, data)


# ---------------------------------------------------------------------------
# rendering


def _fmt(x: float, digits: int = 4) -> str:
    return "" if x is None or not np.isfinite(x) else f"{x:.{digits}f}"


def _markdown_grid(frame: pd.DataFrame) -> list[str]:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return _fmt(float(v))
        return str(v)
    lines = ["| " + " | ".join(frame.columns) + " |", "|" + "---|" * frame.shape[1]]
    lines += ["| " + " | ".join(cell(v) for v in row) + " |" for row in frame.itertuples(index=False)]
    return lines


def _markdown_regression(art: TableArtifact) -> list[str]:
    lines = []
    for panel in art.panels:
        cols = [c for c in art.columns if c.panel == panel]
        if panel:
            lines += [f"**Panel {panel}**", ""]
        header = [""] + [f"{c.block}: {c.label}" if c.block else c.label for c in cols]
        lines += ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        labels = list(dict.fromkeys(cell.label for c in cols for cell in c.cells))
        for label in labels:
            est, se = [label], [""]
            for c in cols:
                cell = next((x for x in c.cells if x.label == label), None)
                est.append(f"{_fmt(cell.estimate)}{cell.stars}" if cell else "")
                se.append(f"({_fmt(cell.se)})" if cell else "")
            lines += ["| " + " | ".join(est) + " |", "| " + " | ".join(se) + " |"]
        for flag, text in FLAG_LABELS.items():
            if any(flag in c.flags for c in cols):
                marks = ["X" if flag in c.flags else "" for c in cols]
                lines.append("| " + " | ".join([text.format(n=art.notes.get("min_messages", ""))] + marks) + " |")
        lines.append("| " + " | ".join(["Observations"] + [str(c.n_obs) for c in cols]) + " |")
        lines.append("| " + " | ".join(["R2"] + [_fmt(c.r_squared) for c in cols]) + " |")
        lines.append("| " + " | ".join(["Within SD"] + [_fmt(c.within_sd) for c in cols]) + " |")
        lines.append("")
    return lines


def render_table(artifact: TableArtifact, fmt: str = "markdown") -> str:
    """CSV (full precision) or Markdown (4 decimals, standard errors in parentheses beneath estimates)."""
    if fmt == "csv":
        buf = io.StringIO()
        artifact.to_frame().to_csv(buf, index=False, float_format="%.17g", lineterminator="\n")
        return buf.getvalue()
    if fmt != "markdown":
        raise ValueError(f"format must be 'csv' or 'markdown', got {fmt!r}")
    lines = [f"### {artifact.table_id}: {artifact.title}", ""]
    lines += _markdown_regression(artifact) if artifact.kind == "regression" else _markdown_grid(artifact.grid)
    if artifact.kind == "regression":
        lines.append(f"Stars: {artifact.notes.get('stars', '')}. Firm and date fixed effects; "
                     "standard errors clustered by industry and date.")
    return "\n".join(lines).rstrip() + "\n"
