"""Experiment orchestration, scoring protocol and reports."""

from .config import ALGOS, ConfigError, ExperimentConfig, load_config, parse_config, parse_grid, set_path
from .record import (
    ExperimentRecord,
    RankRow,
    ScoreSummary,
    SeedSeries,
    final_score,
    find_records,
    format_score,
    load_record,
    rank_table,
    read_raw_csv,
    save_record,
    sliding_window,
)
from .report import FORMATS, SCHEMA_VERSION, curve, emit_report, markdown_table, summary_json
from .runner import (
    NOISE_PRESET,
    GridResult,
    NoiseRow,
    SweepRow,
    grid_search,
    horizon_sweep,
    noise_sweep,
    run_experiment,
    run_seed,
)

__all__ = [
    "ALGOS", "ConfigError", "ExperimentConfig", "load_config", "parse_config", "parse_grid", "set_path",
    "ExperimentRecord", "SeedSeries", "ScoreSummary", "RankRow", "final_score", "format_score",
    "sliding_window", "rank_table", "save_record", "load_record", "find_records", "read_raw_csv",
    "FORMATS", "SCHEMA_VERSION", "emit_report", "curve", "markdown_table", "summary_json",
    "run_experiment", "run_seed", "horizon_sweep", "grid_search", "noise_sweep",
    "GridResult", "SweepRow", "NoiseRow", "NOISE_PRESET",
]
