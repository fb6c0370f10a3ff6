//! Percolation curves: data counts versus packing counts in a growing
//! annulus, and detection of the critical radius.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::geometry::ellipsoid::EllipsoidSummary;
use crate::geometry::packing::{annulus_count_log, solve_log_epsilon};
use crate::scalar::{count, Scalar};

/// `n(A)` and `ln N(A)` over a uniform grid of inner radii on
/// `[0, chi_alpha1]`. The outer ellipsoid is the oracle ellipsoid, so
/// `N(A)` at inner radius 0 equals the point count.
#[derive(Debug, Clone, Serialize)]
pub struct PercolationCurve<T> {
    pub chi_grid: Vec<T>,
    pub chi_alpha1: T,
    pub epsilon: T,
    /// Points strictly outside the inner ellipsoid.
    pub n_annulus: Vec<usize>,
    /// `-inf` at the outer radius (serialized as `null`).
    pub log_n_packing: Vec<T>,
    /// Left end of the steepest step of `n_annulus`.
    pub critical_index: usize,
}

impl<T: Scalar> PercolationCurve<T> {
    pub fn critical_chi(&self) -> T {
        self.chi_grid[self.critical_index]
    }

    /// `chi / chi_alpha1` for every grid point.
    pub fn normalized_grid(&self) -> Vec<T> {
        self.chi_grid.iter().map(|&c| c / self.chi_alpha1).collect()
    }

    /// Width, as a fraction of `chi_alpha1`, of the radius window over which
    /// `n(A)` falls from `hi * m` to `lo * m`, measured between the first
    /// grid points at or below each level.
    pub fn transition_width(&self, hi: f64, lo: f64) -> T {
        let m = self.n_annulus[0] as f64;
        let first_below = |level: f64| {
            self.n_annulus
                .iter()
                .position(|&n| (n as f64) <= level * m)
                .unwrap_or(self.n_annulus.len() - 1)
        };
        let a = first_below(hi);
        let b = first_below(lo);
        (self.chi_grid[b] - self.chi_grid[a]) / self.chi_alpha1
    }
}

/// Index `i` maximizing `|v[i+1] - v[i]|`, ties to the smallest `i`.
pub fn critical_point<T: Scalar>(values: &[T]) -> Result<usize> {
    if values.len() < 2 {
        return Err(Error::param("critical point needs at least two values"));
    }
    let mut best = 0;
    let mut best_step = T::neg_infinity();
    for (i, w) in values.windows(2).enumerate() {
        let step = (w[1] - w[0]).abs();
        if step > best_step {
            best_step = step;
            best = i;
        }
    }
    Ok(best)
}

/// Builds the curve from precomputed Mahalanobis norms.
pub fn percolation_from_norms<T: Scalar>(
    summary: &EllipsoidSummary<T>,
    norms: &[T],
    grid_size: usize,
) -> Result<PercolationCurve<T>> {
    if grid_size < 3 {
        return Err(Error::param(format!("grid size must be at least 3, got {grid_size}")));
    }
    let m = norms.len();
    let d = summary.dim();
    let chi1 = summary.chi_alpha1();
    let lsd = summary.log_sqrt_det();
    let log_eps = solve_log_epsilon(chi1, d, lsd, m)?;
    let epsilon = log_eps.exp();

    let mut sorted = norms.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let last = count::<T>(grid_size - 1);
    let mut chi_grid = Vec::with_capacity(grid_size);
    let mut n_annulus = Vec::with_capacity(grid_size);
    let mut log_n_packing = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let chi2 = if k + 1 == grid_size {
            chi1
        } else {
            chi1 * count::<T>(k) / last
        };
        let inside = sorted.partition_point(|&r| r <= chi2);
        chi_grid.push(chi2);
        n_annulus.push(m - inside);
        log_n_packing.push(annulus_count_log(chi1, chi2, epsilon, d, lsd)?);
    }
    let counts: Vec<f64> = n_annulus.iter().map(|&n| n as f64).collect();
    let critical_index = critical_point(&counts)?;
    Ok(PercolationCurve {
        chi_grid,
        chi_alpha1: chi1,
        epsilon,
        n_annulus,
        log_n_packing,
        critical_index,
    })
}

/// Fits the confidence ellipsoid of `features` (optionally ridge-regularized)
/// and tabulates the percolation curve over `grid_size` inner radii.
pub fn percolation_curve<T: Scalar>(
    features: &FeatureSet<T>,
    grid_size: usize,
    ridge: Option<T>,
) -> Result<PercolationCurve<T>> {
    let (summary, norms) = EllipsoidSummary::fit_with_norms(features, ridge)?;
    percolation_from_norms(&summary, &norms, grid_size)
}
