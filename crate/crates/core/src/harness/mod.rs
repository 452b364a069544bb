//! Experiment orchestration: configuration, the four pipeline stages per
//! seed, and aggregation of learning curves across seeds.

mod aggregate;
mod config;
mod pipeline;

pub use aggregate::{
    aggregate_runs, area_under_curve, export_csv, read_summary_csv, retained_count, RunSummary,
    SeedCurve, SummaryRow, Z_95,
};
pub use config::{reported_tuning, ExperimentConfig, Mode, SelectionConfig, SourcePhase, TargetPhase, Tuning};
pub use pipeline::{
    decompose, derive_seed, load_target_curves, read_results, run_all, run_seed, select,
    train_sources, train_target, SeedOutcome, SeedPaths, SourceReport, TargetResult,
};
