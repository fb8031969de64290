"""Fixed-effect absorption by alternating projections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class DemeanConfig:
    tolerance: float = 1e-10
    max_iterations: int = 10_000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class Grouping:
    """Integer codes for one id column plus a sparse group-sum operator."""

    def __init__(self, ids):
        codes, uniques = pd.factorize(np.asarray(ids), sort=True)
        if (codes < 0).any():
            raise ValueError("group ids contain missing values")
        self.codes = codes
        self.labels = uniques
        self.n_groups = len(uniques)
        self.counts = np.bincount(codes, minlength=self.n_groups).astype(float)
        n = len(codes)
        self._sum = sp.csr_matrix((np.ones(n), (codes, np.arange(n))), shape=(self.n_groups, n))

    def sums(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._sum @ x)

    def means(self, x: np.ndarray) -> np.ndarray:
        return self.sums(x) / self.counts[:, None]

    @property
    def singletons(self) -> int:
        return int((self.counts == 1).sum())


def demean(columns, groupings: Sequence[Grouping], cfg: DemeanConfig | None = None) -> np.ndarray:
    """Residualize `columns` on one or more sets of group dummies.

    Subtracts group means one dimension at a time and repeats until every
    group mean of every column is at most ``cfg.tolerance`` in absolute
    value. Raises :class:`ConvergenceError` otherwise.
    """
    cfg = cfg or DemeanConfig()
    x = np.array(columns, dtype=float, copy=True)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    for g in groupings:
        if len(g.codes) != x.shape[0]:
            raise ValueError("group ids and columns differ in length")
    if np.isnan(x).any():
        raise ValueError("columns contain missing values")
    if not groupings:
        return x[:, 0] if squeeze else x
    if len(groupings) == 1:
        g = groupings[0]
        x -= g.means(x)[g.codes]
        return x[:, 0] if squeeze else x

    means = groupings[0].means(x)
    for _ in range(cfg.max_iterations):
        for i, g in enumerate(groupings):
            if i > 0:
                means = g.means(x)
            x -= means[g.codes]
        means = groupings[0].means(x)
        if np.abs(means).max(initial=0.0) <= cfg.tolerance:
            worst = max(np.abs(g.means(x)).max(initial=0.0) for g in groupings[1:])
            if worst <= cfg.tolerance:
                return x[:, 0] if squeeze else x
    worst_dim, worst_val, where = 0, -1.0, None
    for d, g in enumerate(groupings):
        m = np.abs(g.means(x))
        if m.max() > worst_val:
            worst_val = float(m.max())
            gi, col = np.unravel_index(np.argmax(m), m.shape)
            worst_dim, where = d, (g.labels[gi], col)
    raise ConvergenceError(
        f"demeaning did not converge in {cfg.max_iterations} sweeps; worst group mean {worst_val:.3e} "
        f"(dimension {worst_dim}, group {where[0]!r}, column {where[1]})"
    )


def demean_two_way(columns, firm_ids, date_ids, cfg: DemeanConfig | None = None) -> np.ndarray:
    """Remove firm and date fixed effects from each column."""
    return demean(columns, [Grouping(firm_ids), Grouping(date_ids)], cfg)


def max_group_mean(columns, groupings: Sequence[Grouping]) -> float:
    x = np.asarray(columns, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return max(float(np.abs(g.means(x)).max(initial=0.0)) for g in groupings)


def within_sd(column, firm_ids, date_ids, cfg: DemeanConfig | None = None) -> float:
    """Sample standard deviation after removing firm and date fixed effects."""
    values = np.asarray(column, dtype=float)
    if values.size < 2:
        raise ValueError("within_sd needs at least two observations")
    return float(np.std(demean_two_way(values, firm_ids, date_ids, cfg), ddof=1))


def fe_degrees_of_freedom(groupings: Sequence[Grouping]) -> int:
    """Parameters absorbed by the fixed effects (intercept included).

    One dimension: its group count. Two dimensions: G1 + G2 minus the number
    of connected components of the bipartite group graph.
    """
    if not groupings:
        return 1
    if len(groupings) == 1:
        return groupings[0].n_groups
    if len(groupings) > 2:
        raise ValueError("at most two fixed-effect dimensions are supported")
    from scipy.sparse.csgraph import connected_components

    a, b = groupings
    n1, n2 = a.n_groups, b.n_groups
    edges = sp.coo_matrix((np.ones(len(a.codes)), (a.codes, n1 + b.codes)), shape=(n1 + n2, n1 + n2))
    n_comp, _ = connected_components(edges, directed=False)
    return n1 + n2 - n_comp
