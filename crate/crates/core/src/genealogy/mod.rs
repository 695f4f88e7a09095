//! Path-weight analytics for the genealogic branching random walk.

mod bounds;
mod path;
mod series;

pub use bounds::{
    count_nonbacktracking, surplus_path_bound_check, verify_backtrack_bounds, write_bound_csv, BoundReport, SLACK,
};
pub use path::{
    erase_first, erlang_tail, expected_occupancy, path_weight, preimages, preimages_one, tau, tau_sequence, z_weight,
    PathLabel, PREIMAGE_CAP,
};
pub use series::{
    alpha_star, containment_frequency, extinction_series, generation_zeta_sums, overall_fast_bound, zeta_weights,
    FastBound, SeriesReport,
};
