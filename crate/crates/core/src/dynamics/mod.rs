//! Contact process and branching random walk with degree-penalised rates.

mod brw;
mod cp;
mod gbrw;
mod graphical;
mod martingale;
mod penalty;
mod report;
mod star;
mod sumtree;

pub use brw::{simulate_brw, simulate_brw_table, simulate_coupled_cp_brw, BrwOptions, BrwRun, CoupledRun, DEFAULT_CAP};
pub use cp::{simulate_cp, simulate_cp_table, simulate_cp_tree, CpOptions, CpRun, StarWatch};
pub use gbrw::{simulate_gbrw, simulate_gbrw_table, GbrwOptions, GbrwRun, LabelId, LabelTrie};
pub use graphical::{
    build_graphical_rep, nesting_violations, run_cp_from_rep, thin_rep, thin_rep_with, GraphicalRep, RepTrace,
};
pub use martingale::{admissible_alpha, alpha_is_admissible, martingale_drift, martingale_series, DriftEstimate};
pub use penalty::{infection_rate, Penalty, PenaltySpec, RateTable};
pub use report::{write_trace_csv, EventCounts, EventKind, SurvivalReport, TraceEvent, NO_AUX};
pub use star::{
    conditioned_leaf_count, infestation_status, infestation_threshold, star_extinction_time, star_survival_experiment,
    two_state_occupation, StarConfig, StarStart, StarSurvival,
};
