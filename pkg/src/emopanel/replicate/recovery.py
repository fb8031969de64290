"""Monte Carlo recovery of planted coefficients through the full pipeline."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from ..econ.ols import RegressionSpec, fit_hdfe_ols
from ..pipeline import build_panel, run_ingest
from .catalog import CONTROLS, EMOTION_ROWS
from .synthetic import SyntheticConfig, generate_synthetic

MIN_SEEDS = 50
THREADS_ENV = "EMOPANEL_THREADS"

# Baseline column: six pre-market emotions plus the standard controls.
RECOVERY_SPEC = RegressionSpec(
    "ret_oc", tuple(f"pre_all_{e}" for e in EMOTION_ROWS) + CONTROLS, name="recovery")


class RecoveryError(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        self.seed = seed
        super().__init__(f"seed {seed}: {type(cause).__name__}: {cause}")


def recovery_config(**overrides) -> SyntheticConfig:
    """Defaults for recovery runs: no market-hours or alternative-source messages, which the fit ignores."""
    return SyntheticConfig(**{"market_messages": False, "alternative_emotions": False, **overrides})


def planted_values(cfg: SyntheticConfig, spec: RegressionSpec = RECOVERY_SPEC) -> pd.Series:
    """True coefficient of each regressor; NaN where the data-generating process plants none."""
    truth = {f"pre_all_{e}": b for e, b in cfg.beta.items()}
    truth.update({f"mkt_all_{e}": b for e, b in cfg.market_beta.items()})
    truth.update({"ret_oc_lag1": cfg.gamma, "ret_co": cfg.zeta_co})
    return pd.Series({r: truth.get(r, np.nan) for r in spec.regressors}, dtype=float)


def run_seed(cfg: SyntheticConfig, seed: int, spec: RegressionSpec = RECOVERY_SPEC,
             level: float = 0.95) -> pd.DataFrame:
    """Generate, ingest, aggregate and fit one seed; one row per regressor."""
    data = generate_synthetic(cfg, seed)
    kept = run_ingest(data.messages, data.security_master, data.calendar, label=False).kept
    panel = build_panel(kept, data.prices, data.calendar, index_members=data.index_members, splits=("all",),
                        equal_weight_all=False, alternative=False)
    fit = fit_hdfe_ols(spec, panel)
    ci = fit.conf_int(level)
    return pd.DataFrame({
        "seed": seed,
        "term": list(spec.regressors),
        "estimate": fit.coefficients.to_numpy(),
        "se": fit.std_errors.to_numpy(),
        "lower": ci.iloc[:, 0].to_numpy(),
        "upper": ci.iloc[:, 1].to_numpy(),
        "p_value": fit.p_values.to_numpy(),
        "n_obs": fit.n_obs,
    })


def _guarded(args) -> pd.DataFrame:
    cfg, seed, spec, level = args
    try:
        return run_seed(cfg, seed, spec, level)
    except Exception as exc:  # re-raised below with the seed attached
        raise RecoveryError(seed, exc) from exc


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n if n > 0 else (os.cpu_count() or 1))


@dataclass
class RecoveryReport:
    summary: pd.DataFrame
    estimates: pd.DataFrame
    seeds: list[int]
    elapsed: float
    level: float

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        self.summary.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
        return path


def summarize(estimates: pd.DataFrame, planted: pd.Series, alpha: float = 0.05) -> pd.DataFrame:
    """Per-term coverage, bias, sign agreement and rejection rate over seeds.

    Coverage, bias and sign agreement are NaN for terms without a planted
    value; sign agreement is also NaN for a planted zero.
    """
    rows = []
    for term, g in estimates.groupby("term", sort=False):
        truth = planted.get(term, np.nan)
        has_truth = np.isfinite(truth)
        covered = (g["lower"] <= truth) & (truth <= g["upper"])
        rows.append({
            "term": term,
            "planted": truth,
            "coverage": float(covered.mean()) if has_truth else np.nan,
            "bias": float(g["estimate"].mean() - truth) if has_truth else np.nan,
            "sign_rate": float((np.sign(g["estimate"]) == np.sign(truth)).mean())
            if has_truth and truth != 0 else np.nan,
            "rejection_rate": float((g["p_value"] < alpha).mean()),
            "mean_estimate": float(g["estimate"].mean()),
            "mean_se": float(g["se"].mean()),
            "signal_to_se": float(abs(truth) / g["se"].mean()) if has_truth else np.nan,
            "n_seeds": len(g),
        })
    return pd.DataFrame(rows)


def recovery_experiment(cfg: SyntheticConfig, n_seeds: int, first_seed: int = 0,
                        spec: RegressionSpec = RECOVERY_SPEC, level: float = 0.95,
                        workers: int | None = None) -> RecoveryReport:
    """Run the pipeline on `n_seeds` synthetic data sets and summarize recovery of the planted coefficients.

    Seeds run in a process pool of `workers` (default: the
    ``EMOPANEL_THREADS`` environment variable, 1 when unset; 0 means one
    per CPU). Results are merged in seed order, so the report does not
    depend on the worker count. A failing seed aborts the run with a
    :class:`RecoveryError` naming it.
    """
    if n_seeds < MIN_SEEDS:
        raise ValueError(f"recovery_experiment needs at least {MIN_SEEDS} seeds, got {n_seeds}")
    workers = worker_count() if workers is None else max(1, workers)
    seeds = list(range(first_seed, first_seed + n_seeds))
    jobs = [(cfg, s, spec, level) for s in seeds]
    start = time.perf_counter()
    if workers == 1:
        parts = [_guarded(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_guarded, jobs))
    elapsed = time.perf_counter() - start
    estimates = pd.concat(parts, ignore_index=True)
    summary = summarize(estimates, planted_values(cfg, spec), alpha=1.0 - level)
    return RecoveryReport(summary, estimates, seeds, elapsed, level)


def null_config(cfg: SyntheticConfig) -> SyntheticConfig:
    """The same process with every emotion loading set to zero."""
    return replace(cfg, beta={e: 0.0 for e in cfg.beta}, market_beta={e: 0.0 for e in cfg.market_beta})
