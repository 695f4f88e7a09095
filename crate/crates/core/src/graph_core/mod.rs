//! Graph and degree-distribution construction.

mod attack;
mod builders;
mod config_model;
pub mod io;
mod lazy_tree;
mod multigraph;
mod pmf;
mod tails;

pub use attack::{binomial_thinning_pmf, targeted_attack, AttackCounts, AttackResult};
pub use builders::{build_star, build_star_row, StarRow};
pub use config_model::{build_configuration_model, sample_degree_sequence, OddSum};
pub use lazy_tree::{build_sst, sample_gw_tree, LazyTree, NodeId};
pub use multigraph::{MultiGraph, MultiGraphBuilder};
pub use pmf::{hash_transform, size_biased, DegreePmf, HashTransform, Sampler, TailClass};
pub use tails::{check_weak_power_law, pareto_samples, TailInput, TailRow, WeakPowerLawReport};
