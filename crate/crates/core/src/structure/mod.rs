//! k-cores, the fixed-point core predictor, targeted attacks, neighbourhood
//! exploration, expansion certificates and star-path embeddings.

mod attack_core;
mod embedding;
mod expansion;
mod explore;
mod jl;
mod kcore;
mod moments;

pub use attack_core::{core_after_attack_experiment, densities_stable, write_density_csv, AttackCoreRow};
pub use embedding::{m_embedding_search, EmbeddingParams, StarChain, StarRule};
pub use expansion::{certify_subset, delta_k_good_check, Certificate, ExpansionReport, SubsetVerdict};
pub use explore::{
    explore_graph, explore_neighborhood, surplus_count, surplus_edges_classified, ExplNode, ExplorationOutput,
    ExploreOptions,
};
pub use jl::{attack_threshold, eta_zeta_min, h_h1, jl_fixed_point, FixedPointReport};
pub use kcore::{k_core, k_core_mask};
pub use moments::{generation_moment_mc, hk_exponent, hk_superadditive, MomentEstimate};
