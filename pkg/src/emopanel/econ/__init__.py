"""Fixed-effects estimation, clustered covariances and correlation tests."""

from .covariance import cluster_cov_cgm, hc1_cov, one_way_cluster_cov, psd_repair
from .demean import ConvergenceError, DemeanConfig, Grouping, demean, demean_two_way, within_sd
from .labtests import LAB_CHECKS, lab_tests
from .ols import (FitResult, MissingColumnError, RankDeficiencyError, RegressionSpec, fit_hdfe_ols,
                  ols_dummy_oracle)
from .stats import corr_bonferroni

__all__ = [
    "ConvergenceError", "DemeanConfig", "FitResult", "Grouping", "LAB_CHECKS", "MissingColumnError",
    "RankDeficiencyError", "RegressionSpec", "cluster_cov_cgm", "corr_bonferroni", "demean",
    "demean_two_way", "fit_hdfe_ols", "hc1_cov", "lab_tests", "ols_dummy_oracle", "one_way_cluster_cov",
    "psd_repair", "within_sd",
]
