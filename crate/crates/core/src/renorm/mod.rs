//! Oriented percolation on the cone lattice and its comparison with the contact
//! process on a row of stars.

mod compare;
mod cone;

pub use compare::{renorm_compare, CompareParams, CompareRow, RenormTable};
pub use cone::{
    cluster_from_field, cluster_survives, contour_census, op_cluster, peierls_bound, peierls_partial,
    reachable_from_field, survival_estimate, write_survival_csv, ClusterResult, ConeConfig, ContourReport, Dependence,
    EdgeField, SurvivalEstimate, YMax,
};
