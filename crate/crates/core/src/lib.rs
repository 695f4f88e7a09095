//! Degree-penalized contact processes and branching random walks on random graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph_core`]: multigraphs, degree pmfs, configuration models, lazy Galton-Watson
//!   trees, star rows, measure transforms and targeted attack.
//! - [`dynamics`]: exact continuous-time simulation of the contact process (CP), the
//!   branching random walk (BRW) and its genealogic variant, graphical representations
//!   and couplings, star infestation.
//! - [`genealogy`]: path weights, loop erasure and the backtracking bounds, extinction
//!   series and the fast-extinction bound.
//! - [`structure`]: k-cores and the Janson-Łuczak fixed point, attack experiments,
//!   neighbourhood exploration, expansion checks and star-chain embedding search.
//! - [`renorm`]: oriented percolation on the cone and the star-row comparison.
//! - [`experiments`]: config-driven runner, scaling fits and the phase table.
//!
//! Runnable walkthroughs live in `crates/core/examples`:
//!
//! ```text
//! cargo run --release --example configuration_model
//! cargo run --release --example lazy_gw_tree
//! cargo run --release --example contact_process
//! cargo run --release --example graphical_coupling
//! cargo run --release --example genealogy_bounds
//! cargo run --release --example star_survival
//! cargo run --release --example kcore_fixed_point
//! cargo run --release --example targeted_attack
//! cargo run --release --example exploration
//! cargo run --release --example oriented_percolation
//! cargo run --release --example scaling_fit
//! cargo run --release --example run_config
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::too_many_arguments)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod genealogy;
pub mod graph_core;
pub mod renorm;
pub mod rng;
pub mod stats;
pub mod structure;

pub use error::{Error, Result};
