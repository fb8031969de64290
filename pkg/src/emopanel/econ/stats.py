"""Pairwise correlations with Bonferroni-adjusted p-values."""

from __future__ import annotations

import itertools

import numpy as np
import pandas as pd
from scipy import stats


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided p-value of a Pearson correlation from the t transform with n - 2 dof."""
    if n < 3 or not np.isfinite(r):
        return float("nan")
    if abs(r) >= 1.0:
        return 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def bonferroni(p, m: int):
    """min(1, p * m)."""
    return np.minimum(1.0, np.asarray(p, dtype=float) * m)


def corr_bonferroni(columns: pd.DataFrame) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Pearson correlation matrix and Bonferroni-adjusted p-value matrix.

    Each pair uses the rows where both columns are present. The number of
    tests is the number of distinct column pairs. A column with zero
    variance has NaN correlations (and p-values) with every other column.

    Returns
    -------
    corr, p_adj : DataFrame
        Square frames indexed by column name; diagonals are 1 and 0.
    """
    if columns.shape[1] < 2:
        raise ValueError("corr_bonferroni needs at least two columns")
    names = list(columns.columns)
    k = len(names)
    m = k * (k - 1) // 2
    values = columns.to_numpy(dtype=float)
    corr = np.eye(k)
    p_adj = np.zeros((k, k))
    for i, j in itertools.combinations(range(k), 2):
        both = ~(np.isnan(values[:, i]) | np.isnan(values[:, j]))
        a, b = values[both, i], values[both, j]
        if a.size < 3 or np.ptp(a) == 0 or np.ptp(b) == 0:
            r = p = float("nan")
        else:
            r = float(np.corrcoef(a, b)[0, 1])
            p = float(bonferroni(pearson_p_value(r, a.size), m))
        corr[i, j] = corr[j, i] = r
        p_adj[i, j] = p_adj[j, i] = p
    for i in range(k):
        if np.nanstd(values[:, i]) == 0:
            corr[i, i] = np.nan
            p_adj[i, i] = np.nan
    return pd.DataFrame(corr, index=names, columns=names), pd.DataFrame(p_adj, index=names, columns=names)
