"""Sandwich covariances: heteroskedasticity-robust, one-way and two-way clustered."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demean import Grouping


@dataclass
class CovarianceInfo:
    kind: str
    cluster_counts: dict[str, int]
    min_eigenvalue_before_repair: float
    repaired: bool


def bread(x: np.ndarray) -> np.ndarray:
    return np.linalg.inv(x.T @ x)


def _scores(x: np.ndarray, resid: np.ndarray) -> np.ndarray:
    return x * resid[:, None]


def small_sample_factor(n_clusters: int, n_obs: int, k_total: int) -> float:
    """G/(G-1) * (N-1)/(N-K)."""
    if n_clusters < 2:
        raise ValueError("a clustering dimension needs at least two clusters")
    if n_obs <= k_total:
        raise ValueError(f"no residual degrees of freedom (N={n_obs}, K={k_total})")
    return n_clusters / (n_clusters - 1) * (n_obs - 1) / (n_obs - k_total)


def one_way_cluster_cov(x: np.ndarray, resid: np.ndarray, clusters, k_total: int,
                        xtx_inv: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Cluster-robust sandwich on one partition with its own small-sample factor."""
    g = clusters if isinstance(clusters, Grouping) else Grouping(clusters)
    b = bread(x) if xtx_inv is None else xtx_inv
    s = g.sums(_scores(x, resid))
    c = small_sample_factor(g.n_groups, x.shape[0], k_total)
    return c * b @ (s.T @ s) @ b, g.n_groups


def hc1_cov(x: np.ndarray, resid: np.ndarray, k_total: int, xtx_inv: np.ndarray | None = None) -> np.ndarray:
    """Heteroskedasticity-robust sandwich scaled by N/(N-K)."""
    n = x.shape[0]
    if n <= k_total:
        raise ValueError(f"no residual degrees of freedom (N={n}, K={k_total})")
    b = bread(x) if xtx_inv is None else xtx_inv
    s = _scores(x, resid)
    return n / (n - k_total) * b @ (s.T @ s) @ b


def psd_repair(v: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Symmetrize and zero negative eigenvalues; returns (matrix, min eigenvalue before, repaired?)."""
    v = (v + v.T) / 2.0
    if v.size == 0:
        return v, 0.0, False
    vals, vecs = np.linalg.eigh(v)
    lo = float(vals.min())
    if lo >= 0.0:
        return v, lo, False
    fixed = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    return (fixed + fixed.T) / 2.0, lo, True


def cluster_cov_cgm(x: np.ndarray, resid: np.ndarray, clusters_a, clusters_b, k_total: int,
                    xtx_inv: np.ndarray | None = None, names: tuple[str, str] = ("A", "B")
                    ) -> tuple[np.ndarray, CovarianceInfo]:
    """Two-way clustered covariance V_A + V_B - V_AB.

    `x` is the (demeaned) regressor matrix and `resid` the regression
    residuals. Each term carries its own G/(G-1) * (N-1)/(N-K) factor; the
    intersection term clusters on the (A, B) pairs. The sum is symmetrized
    and negative eigenvalues are zeroed.
    """
    b = bread(x) if xtx_inv is None else xtx_inv
    ga = clusters_a if isinstance(clusters_a, Grouping) else Grouping(clusters_a)
    gb = clusters_b if isinstance(clusters_b, Grouping) else Grouping(clusters_b)
    for g, name in ((ga, names[0]), (gb, names[1])):
        if g.n_groups < 2:
            raise ValueError(f"clustering dimension {name!r} has a single cluster; variance not identified")
    pair = ga.codes.astype(np.int64) * gb.n_groups + gb.codes
    gab = Grouping(pair)
    va, _ = one_way_cluster_cov(x, resid, ga, k_total, b)
    vb, _ = one_way_cluster_cov(x, resid, gb, k_total, b)
    vab, _ = one_way_cluster_cov(x, resid, gab, k_total, b)
    v, lo, repaired = psd_repair(va + vb - vab)
    info = CovarianceInfo(
        kind="cluster2",
        cluster_counts={names[0]: ga.n_groups, names[1]: gb.n_groups, f"{names[0]}x{names[1]}": gab.n_groups},
        min_eigenvalue_before_repair=lo,
        repaired=repaired,
    )
    return v, info
