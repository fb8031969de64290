"""Synthetic data, study catalog, table builders and coefficient-recovery experiments."""

from .catalog import TABLE_IDS, CatalogError, ColumnSpec, StudyConfig, build_columns, load_catalog, parse_catalog
from .recovery import RecoveryError, RecoveryReport, null_config, recovery_config, recovery_experiment, run_seed
from .synthetic import SyntheticConfig, SyntheticData, generate_synthetic, write_synthetic
from .tables import TableArtifact, render_table, run_table

__all__ = [
    "CatalogError", "ColumnSpec", "RecoveryError", "RecoveryReport", "StudyConfig", "SyntheticConfig",
    "SyntheticData", "TABLE_IDS", "TableArtifact", "build_columns", "generate_synthetic", "load_catalog",
    "null_config", "parse_catalog", "recovery_config", "recovery_experiment", "render_table", "run_seed",
    "run_table", "write_synthetic",
]
