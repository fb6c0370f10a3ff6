//! Confidence-ellipsoid geometry, sphere-packing counts and percolation.

pub mod ellipsoid;
pub mod packing;
pub mod percolation;

pub use ellipsoid::EllipsoidSummary;
pub use packing::{
    annulus_count_log, ellipsoid_volume_log, packing_count_log, packing_ratio, solve_epsilon, solve_log_epsilon,
};
pub use percolation::{critical_point, percolation_curve, percolation_from_norms, PercolationCurve};
