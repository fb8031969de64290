"""Sign tests of laboratory findings on emotions and prices.

Findings I, II and IV correlate variables after removing firm and date
effects; Finding III uses raw values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..panel import Panel, winsorize
from .demean import DemeanConfig, Grouping, demean
from .ols import MissingColumnError
from .stats import pearson_p_value


@dataclass(frozen=True)
class LabCheck:
    finding: str
    emotion_column: str
    target_column: str
    expected_sign: int
    demeaned: bool


LAB_CHECKS: tuple[LabCheck, ...] = (
    LabCheck("I", "pre_all_fear", "ret_oc", -1, True),
    LabCheck("II", "mkt_all_fear", "ret_oc", -1, True),
    LabCheck("II", "mkt_all_anger", "ret_oc", -1, True),
    LabCheck("II", "mkt_all_happy", "ret_oc", +1, True),
    LabCheck("III", "pre_all_fear", "mcap_lag1", +1, False),
    LabCheck("III", "pre_all_valence", "mcap_lag1", -1, False),
    LabCheck("IV", "mkt_all_fear", "log_dvol", +1, True),
)


def _pair(data: pd.DataFrame, check: LabCheck, winsor: tuple[float, float] | None,
          cfg: DemeanConfig | None) -> tuple[np.ndarray, np.ndarray]:
    cols = [check.emotion_column, check.target_column]
    frame = data[cols + ["ticker", "date"]].dropna()
    x = frame[cols].to_numpy(float)
    if winsor is not None:
        x = np.column_stack([winsorize(x[:, j], *winsor) for j in range(2)])
    if check.demeaned and len(frame):
        x = demean(x, [Grouping(frame["ticker"].to_numpy()), Grouping(frame["date"].to_numpy())], cfg)
    return x[:, 0], x[:, 1]


def lab_tests(panel, alpha: float = 0.05, winsor: tuple[float, float] | None = (0.001, 0.999),
              checks: tuple[LabCheck, ...] = LAB_CHECKS, demean_cfg: DemeanConfig | None = None) -> pd.DataFrame:
    """Correlation, p-value and verdict for each laboratory finding.

    The verdict is ``pass`` when the correlation has the expected sign and
    p < `alpha`, ``wrong_sign`` when it is significant with the opposite
    sign, and ``insignificant`` otherwise.
    """
    data = panel.data if isinstance(panel, Panel) else panel
    for check in checks:
        for col in (check.emotion_column, check.target_column, "ticker", "date"):
            if col not in data.columns:
                raise MissingColumnError(col, f"lab test {check.finding}: ")
    rows = []
    for check in checks:
        x, y = _pair(data, check, winsor, demean_cfg)
        if x.size < 3 or np.ptp(x) == 0 or np.ptp(y) == 0:
            r = p = float("nan")
        else:
            r = float(np.corrcoef(x, y)[0, 1])
            p = pearson_p_value(r, x.size)
        if not np.isfinite(p) or p >= alpha:
            verdict = "insignificant"
        elif np.sign(r) == check.expected_sign:
            verdict = "pass"
        else:
            verdict = "wrong_sign"
        rows.append({
            "finding": check.finding,
            "emotion": check.emotion_column,
            "target": check.target_column,
            "demeaned": check.demeaned,
            "expected_sign": check.expected_sign,
            "n_obs": int(x.size),
            "correlation": r,
            "p_value": p,
            "verdict": verdict,
        })
    return pd.DataFrame(rows)
