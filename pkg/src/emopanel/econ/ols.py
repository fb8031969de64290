"""Least squares with absorbed firm and date fixed effects."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from ..panel import Panel, winsorize
from .covariance import cluster_cov_cgm, hc1_cov, one_way_cluster_cov, psd_repair
from .demean import DemeanConfig, Grouping, demean, fe_degrees_of_freedom

ORACLE_MAX_ROWS = 5_000


class MissingColumnError(KeyError):
    def __init__(self, column: str, context: str = ""):
        self.column = column
        super().__init__(f"{context}missing column {column!r}" if context else f"missing column {column!r}")

    def __str__(self) -> str:
        return self.args[0]


class RankDeficiencyError(ValueError):
    def __init__(self, columns: list[str]):
        self.columns = columns
        super().__init__(f"regressors are collinear after absorbing fixed effects: {', '.join(columns)}")


@dataclass(frozen=True)
class RegressionSpec:
    """One regression column.

    Regressors named ``a:b`` are products of the (winsorized) base columns.
    `sample_filter` is a pandas query string or a callable returning a
    boolean mask.
    """

    dependent: str
    regressors: tuple[str, ...]
    fe_dims: tuple[str, ...] = ("ticker", "date")
    cluster_dims: tuple[str, ...] = ("ff12", "date")
    sample_filter: str | Callable | None = None
    winsorize_continuous: bool = True
    winsor_limits: tuple[float, float] = (0.001, 0.999)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "fe_dims", tuple(self.fe_dims))
        object.__setattr__(self, "cluster_dims", tuple(self.cluster_dims))
        if self.dependent in self.regressors:
            raise ValueError("dependent variable listed among regressors")
        if len(set(self.regressors)) != len(self.regressors):
            raise ValueError("duplicate regressor names")
        if len(self.fe_dims) > 2:
            raise ValueError("at most two fixed-effect dimensions")
        if len(self.cluster_dims) > 2:
            raise ValueError("at most two clustering dimensions")

    @property
    def base_columns(self) -> list[str]:
        cols = [self.dependent]
        for r in self.regressors:
            for part in r.split(":"):
                if part not in cols:
                    cols.append(part)
        return cols

    def describe(self) -> dict:
        d = asdict(self)
        d["sample_filter"] = (self.sample_filter if isinstance(self.sample_filter, (str, type(None)))
                              else getattr(self.sample_filter, "__name__", "callable"))
        return d


@dataclass
class FitResult:
    spec: RegressionSpec
    coefficients: pd.Series
    covariance: pd.DataFrame
    n_obs: int
    r_squared: float
    r_squared_within: float
    within_sd_dependent: float
    df_inference: float
    dof: dict = field(default_factory=dict)
    cluster_counts: dict = field(default_factory=dict)
    residuals: np.ndarray | None = None

    @property
    def std_errors(self) -> pd.Series:
        return pd.Series(np.sqrt(np.clip(np.diag(self.covariance.to_numpy()), 0.0, None)),
                         index=self.coefficients.index)

    @property
    def t_stats(self) -> pd.Series:
        return self.coefficients / self.std_errors

    @property
    def p_values(self) -> pd.Series:
        t = self.t_stats.to_numpy(float)
        if np.isinf(self.df_inference):
            p = 2.0 * stats.norm.sf(np.abs(t))
        else:
            p = 2.0 * stats.t.sf(np.abs(t), self.df_inference)
        return pd.Series(p, index=self.coefficients.index)

    def conf_int(self, level: float = 0.95) -> pd.DataFrame:
        q = (stats.norm.ppf((1 + level) / 2) if np.isinf(self.df_inference)
             else stats.t.ppf((1 + level) / 2, self.df_inference))
        se = self.std_errors
        return pd.DataFrame({"lower": self.coefficients - q * se, "upper": self.coefficients + q * se})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "term": self.coefficients.index,
            "estimate": self.coefficients.to_numpy(),
            "se": self.std_errors.to_numpy(),
            "t": self.t_stats.to_numpy(),
            "p": self.p_values.to_numpy(),
        })

    def manifest(self) -> dict:
        return {
            "spec": self.spec.describe(),
            "n_obs": self.n_obs,
            "r_squared": self.r_squared,
            "r_squared_within": self.r_squared_within,
            "within_sd_dependent": self.within_sd_dependent,
            "df_inference": self.df_inference,
            "dof": self.dof,
            "cluster_counts": self.cluster_counts,
        }


@dataclass
class _Prepared:
    y: np.ndarray
    x: np.ndarray
    names: list[str]
    frame: pd.DataFrame


def _frame_of(panel) -> pd.DataFrame:
    return panel.data if isinstance(panel, Panel) else panel


def _is_binary(values: np.ndarray) -> bool:
    u = np.unique(values)
    return u.size <= 2 and np.all(np.isin(u, (0.0, 1.0)))


def prepare(spec: RegressionSpec, panel) -> _Prepared:
    """Filter, drop incomplete rows, winsorize continuous columns, and build y and X."""
    data = _frame_of(panel)
    context = f"spec {spec.name!r}: " if spec.name else ""
    needed = list(dict.fromkeys([*spec.base_columns, *spec.fe_dims, *spec.cluster_dims]))
    for col in needed:
        if col not in data.columns:
            raise MissingColumnError(col, context)
    if spec.sample_filter is not None:
        if callable(spec.sample_filter):
            mask = np.asarray(spec.sample_filter(data), dtype=bool)
        else:
            mask = data.eval(spec.sample_filter).to_numpy(dtype=bool)
        data = data.loc[mask]
    frame = data[needed].dropna()
    if frame.empty:
        raise ValueError(f"{context}no complete observations")
    numeric = {}
    for col in spec.base_columns:
        values = frame[col].to_numpy(dtype=float)
        if spec.winsorize_continuous and not _is_binary(values):
            values = winsorize(values, *spec.winsor_limits)
        numeric[col] = values
    x = np.column_stack([np.prod([numeric[p] for p in r.split(":")], axis=0) for r in spec.regressors]) \
        if spec.regressors else np.empty((len(frame), 0))
    return _Prepared(y=numeric[spec.dependent], x=x, names=list(spec.regressors), frame=frame)


def _check_rank(xd: np.ndarray, x_raw: np.ndarray, names: list[str]) -> None:
    if xd.shape[1] == 0:
        return
    raw_scale = np.linalg.norm(x_raw - x_raw.mean(axis=0), axis=0)
    norms = np.linalg.norm(xd, axis=0)
    absorbed = [n for n, a, b in zip(names, norms, raw_scale) if a <= 1e-9 * max(b, 1e-300)]
    if absorbed:
        raise RankDeficiencyError(absorbed + ["<fixed effects>"])
    z = xd / norms
    _, s, vt = np.linalg.svd(z, full_matrices=False)
    if s[-1] <= 1e-9 * s[0]:
        null = vt[-1]
        raise RankDeficiencyError([n for n, v in zip(names, null) if abs(v) > 1e-6])


def fit_hdfe_ols(spec: RegressionSpec, panel, demean_cfg: DemeanConfig | None = None,
                 keep_residuals: bool = False) -> FitResult:
    """Two-way fixed-effects OLS with (two-way) cluster-robust covariance.

    Slopes come from the regression of the demeaned dependent variable on
    the demeaned regressors. R-squared is measured against the raw
    dependent variable, so the absorbed effects count as explained.
    Clustering on two dimensions uses the inclusion-exclusion estimator and
    t-based inference with min(G) - 1 degrees of freedom; one dimension uses
    G - 1; none falls back to the HC1 sandwich with N - K degrees of freedom.
    """
    prep = prepare(spec, panel)
    n, k = prep.x.shape
    groupings = [Grouping(prep.frame[d].to_numpy()) for d in spec.fe_dims]
    if groupings:
        stacked = demean(np.column_stack([prep.y, prep.x]), groupings, demean_cfg)
    else:
        raw = np.column_stack([prep.y, prep.x])
        stacked = raw - raw.mean(axis=0)
    yd, xd = stacked[:, 0], stacked[:, 1:]
    _check_rank(xd, prep.x, prep.names)

    if k:
        q, r = np.linalg.qr(xd)
        beta = scipy.linalg.solve_triangular(r, q.T @ yd)
        r_inv = scipy.linalg.solve_triangular(r, np.eye(k))
        xtx_inv = r_inv @ r_inv.T
    else:
        beta = np.empty(0)
        xtx_inv = np.empty((0, 0))
    resid = yd - xd @ beta

    fe_dof = fe_degrees_of_freedom(groupings)
    k_total = k + fe_dof
    dof = {
        "n_params": k,
        "fe_dof": fe_dof,
        "k_total": k_total,
        "fe_groups": {d: g.n_groups for d, g in zip(spec.fe_dims, groupings)},
        "singletons": {d: g.singletons for d, g in zip(spec.fe_dims, groupings)},
    }
    cluster_counts: dict[str, int] = {}
    if k == 0:
        cov = np.empty((0, 0))
        df_inf = float(n - k_total)
    elif len(spec.cluster_dims) == 2:
        a, b = spec.cluster_dims
        cov, info = cluster_cov_cgm(xd, resid, prep.frame[a].to_numpy(), prep.frame[b].to_numpy(),
                                    k_total, xtx_inv, names=(a, b))
        cluster_counts = info.cluster_counts
        df_inf = float(min(cluster_counts[a], cluster_counts[b]) - 1)
    elif len(spec.cluster_dims) == 1:
        (a,) = spec.cluster_dims
        cov, g = one_way_cluster_cov(xd, resid, prep.frame[a].to_numpy(), k_total, xtx_inv)
        cov, _, _ = psd_repair(cov)
        cluster_counts = {a: g}
        df_inf = float(g - 1)
    else:
        cov = hc1_cov(xd, resid, k_total, xtx_inv)
        df_inf = float(n - k_total)

    ssr = float(resid @ resid)
    sst = float(((prep.y - prep.y.mean()) ** 2).sum())
    sst_within = float(yd @ yd)
    return FitResult(
        spec=spec,
        coefficients=pd.Series(beta, index=prep.names, dtype=float),
        covariance=pd.DataFrame(cov, index=prep.names, columns=prep.names),
        n_obs=n,
        r_squared=1.0 - ssr / sst if sst > 0 else float("nan"),
        r_squared_within=1.0 - ssr / sst_within if sst_within > 0 else float("nan"),
        within_sd_dependent=float(np.std(yd, ddof=1)) if n > 1 else float("nan"),
        df_inference=df_inf,
        dof=dof,
        cluster_counts=cluster_counts,
        residuals=resid if keep_residuals else None,
    )


def _dummies(ids: np.ndarray, drop_first: bool) -> np.ndarray:
    codes, uniques = pd.factorize(ids, sort=True)
    d = np.zeros((len(ids), len(uniques)))
    d[np.arange(len(ids)), codes] = 1.0
    return d[:, 1:] if drop_first else d


def ols_dummy_oracle(spec: RegressionSpec, panel) -> FitResult:
    """Reference fit with explicit indicator columns; for small panels in tests.

    Builds an intercept plus firm and date indicators (first level of each
    dropped), solves the normal equations of the full design, and reports
    the slope block. The covariance uses the full-design sandwich with the
    same clustering and small-sample factors as :func:`fit_hdfe_ols`.
    """
    prep = prepare(spec, panel)
    n, k = prep.x.shape
    if n > ORACLE_MAX_ROWS:
        raise ValueError(f"dummy-variable oracle limited to {ORACLE_MAX_ROWS} rows, got {n}")
    blocks = [prep.x, np.ones((n, 1))] + [_dummies(prep.frame[d].to_numpy(), True) for d in spec.fe_dims]
    z = np.column_stack(blocks)
    ztz = z.T @ z
    zty = z.T @ prep.y
    rank = np.linalg.matrix_rank(z)
    if rank == z.shape[1]:
        coef = scipy.linalg.solve(ztz, zty, assume_a="pos")
        ztz_inv = scipy.linalg.inv(ztz)
    else:
        coef = np.linalg.lstsq(z, prep.y, rcond=None)[0]
        ztz_inv = np.linalg.pinv(ztz)
    resid = prep.y - z @ coef
    k_total = rank

    names = prep.names
    cov = np.full((k, k), np.nan)
    cluster_counts: dict[str, int] = {}
    df_inf = float(n - k_total)
    scores = z * resid[:, None]
    if k and len(spec.cluster_dims) in (1, 2):
        def meat(labels):
            codes, uniques = pd.factorize(labels, sort=True)
            s = np.zeros((len(uniques), z.shape[1]))
            np.add.at(s, codes, scores)
            g = len(uniques)
            return g / (g - 1) * (n - 1) / (n - k_total) * s.T @ s, g

        dims = list(spec.cluster_dims)
        labels = [prep.frame[d].astype(str).to_numpy() for d in dims]
        m_a, g_a = meat(labels[0])
        total = m_a
        cluster_counts[dims[0]] = g_a
        if len(dims) == 2:
            m_b, g_b = meat(labels[1])
            m_ab, _ = meat(np.char.add(np.char.add(labels[0], "\x1f"), labels[1]))
            total = m_a + m_b - m_ab
            cluster_counts[dims[1]] = g_b
        full = ztz_inv @ total @ ztz_inv
        cov = psd_repair(full[:k, :k])[0]
        df_inf = float(min(cluster_counts.values()) - 1)
    elif k:
        full = n / (n - k_total) * ztz_inv @ (scores.T @ scores) @ ztz_inv
        cov = full[:k, :k]

    ssr = float(resid @ resid)
    sst = float(((prep.y - prep.y.mean()) ** 2).sum())
    return FitResult(
        spec=spec,
        coefficients=pd.Series(coef[:k], index=names, dtype=float),
        covariance=pd.DataFrame(cov, index=names, columns=names),
        n_obs=n,
        r_squared=1.0 - ssr / sst if sst > 0 else float("nan"),
        r_squared_within=float("nan"),
        within_sd_dependent=float("nan"),
        df_inference=df_inf,
        dof={"k_total": k_total},
        cluster_counts=cluster_counts,
        residuals=resid,
    )
