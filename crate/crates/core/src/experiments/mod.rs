//! Config-driven experiments: TOML configs, a checkpointing runner, scaling fits,
//! the phase table and the oracle suite.

pub mod config;
mod fit;
mod oracle;
mod phase;
mod runner;

pub use config::{ExperimentConfig, OpMode, PenaltyKind, PmfSpec, Scenario, StarStartKind, SCHEMA};
pub use fit::{fit_scaling, Growth, ScalingFit, FLAT, GAP};
pub use oracle::{oracle_suite, OracleOutcome};
pub use phase::{classify_cells, classify_group, phase_table, PhaseCell, Verdict, CENSORED_SURVIVAL, SURVIVAL_RATIO};
pub use runner::{
    grid_points, run_experiment, run_points, run_replica, scaling_groups, summarize_points, value_columns,
    ExperimentOutput, GridPoint, MetricSummary, PointResult, PointSummary, Row, RunSummary, ScalingGroup,
};
