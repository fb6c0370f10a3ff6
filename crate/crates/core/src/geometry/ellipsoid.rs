//! Confidence-ellipsoid summary of a point cloud.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::linalg::{mean_and_covariance, SymmetricEigen};
use crate::scalar::{count, Scalar};

/// Mean, covariance and eigenstructure of a cluster, plus the smallest
/// Mahalanobis radius `chi_alpha1` that encloses every point.
///
/// Construction fails unless every eigenvalue is strictly positive, so the
/// Mahalanobis machinery is always defined on a value of this type.
#[derive(Debug, Clone)]
pub struct EllipsoidSummary<T> {
    mean: Array1<T>,
    covariance: Array2<T>,
    eigen: SymmetricEigen<T>,
    /// `V diag(λ^-1/2)`: maps centered points to whitened coordinates.
    whitener: Array2<T>,
    log_sqrt_det: T,
    chi_alpha1: T,
}

/// Eigenvalues at or below `λ_max * d * eps * 8` count as zero.
fn null_dims<T: Scalar>(values: &Array1<T>) -> Vec<usize> {
    let d = values.len();
    let top = values.iter().copied().fold(T::zero(), T::max);
    let floor = top * T::epsilon() * T::of(8.0 * d as f64);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= floor)
        .map(|(i, _)| i)
        .collect()
}

impl<T: Scalar> EllipsoidSummary<T> {
    /// Sample mean and unbiased covariance of `features`, with `ridge * I`
    /// added to the covariance when given. `chi_alpha1` is the largest
    /// Mahalanobis norm among the points.
    pub fn fit(features: &FeatureSet<T>, ridge: Option<T>) -> Result<Self> {
        let summary = Self::fit_moments(features.points().view(), ridge)?;
        let chi = summary
            .mahalanobis_norms(features.points().view())
            .into_iter()
            .fold(T::zero(), T::max);
        Ok(Self {
            chi_alpha1: chi,
            ..summary
        })
    }

    /// Like [`fit`](Self::fit) but also returns every point's norm.
    pub fn fit_with_norms(features: &FeatureSet<T>, ridge: Option<T>) -> Result<(Self, Vec<T>)> {
        let summary = Self::fit_moments(features.points().view(), ridge)?;
        let norms = summary.mahalanobis_norms(features.points().view());
        let chi = norms.iter().copied().fold(T::zero(), T::max);
        Ok((
            Self {
                chi_alpha1: chi,
                ..summary
            },
            norms,
        ))
    }

    fn fit_moments(x: ArrayView2<'_, T>, ridge: Option<T>) -> Result<Self> {
        let (mean, mut cov) = mean_and_covariance(x)?;
        if let Some(delta) = ridge {
            if !(delta >= T::zero()) || !delta.is_finite() {
                return Err(Error::param(format!("ridge must be finite and nonnegative, got {delta}")));
            }
            cov.diag_mut().mapv_inplace(|v| v + delta);
        }
        Self::from_moments(mean, cov, T::zero())
    }

    /// Wraps given moments; `chi_alpha1` is supplied by the caller.
    pub fn from_moments(mean: Array1<T>, covariance: Array2<T>, chi_alpha1: T) -> Result<Self> {
        let d = mean.len();
        if d == 0 || covariance.dim() != (d, d) {
            return Err(Error::param("mean and covariance dimensions disagree"));
        }
        let eigen = SymmetricEigen::new(covariance.view())?;
        let null = null_dims(&eigen.values);
        if !null.is_empty() {
            return Err(Error::RankDeficient {
                null_dims: null,
                dimension: d,
            });
        }
        let half = T::of(0.5);
        let log_sqrt_det = eigen.values.iter().map(|v| v.ln()).sum::<T>() * half;
        let inv_sqrt = eigen.values.mapv(|v| T::one() / v.sqrt());
        let whitener = &eigen.vectors * &inv_sqrt.insert_axis(Axis(0));
        Ok(Self {
            mean,
            covariance,
            eigen,
            whitener,
            log_sqrt_det,
            chi_alpha1,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<T> {
        &self.mean
    }

    pub fn covariance(&self) -> &Array2<T> {
        &self.covariance
    }

    /// Descending.
    pub fn eigenvalues(&self) -> &Array1<T> {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &Array2<T> {
        &self.eigen.vectors
    }

    /// `½ Σ ln λᵢ`, the natural log of `sqrt(det Σ)`.
    pub fn log_sqrt_det(&self) -> T {
        self.log_sqrt_det
    }

    pub fn chi_alpha1(&self) -> T {
        self.chi_alpha1
    }

    /// `sqrt((x - mean)ᵀ Σ⁻¹ (x - mean))` via the eigenbasis.
    pub fn mahalanobis_norm(&self, x: ArrayView1<'_, T>) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::param(format!(
                "point has dimension {}, ellipsoid has {}",
                x.len(),
                self.dim()
            )));
        }
        let centered = &x - &self.mean;
        let z = centered.dot(&self.whitener);
        Ok(z.dot(&z).sqrt())
    }

    /// Norms of every row of `x`, whitened in row blocks.
    pub fn mahalanobis_norms(&self, x: ArrayView2<'_, T>) -> Vec<T> {
        const BLOCK: usize = 4096;
        let mut out = Vec::with_capacity(x.nrows());
        let mut start = 0;
        while start < x.nrows() {
            let end = (start + BLOCK).min(x.nrows());
            let centered = &x.slice(s![start..end, ..]) - &self.mean.view().insert_axis(Axis(0));
            let z = centered.dot(&self.whitener);
            out.extend(z.rows().into_iter().map(|r| r.dot(&r).sqrt()));
            start = end;
        }
        out
    }

    /// Average squared norm; `d (m-1)/m` in exact arithmetic for the
    /// fitted points without ridge.
    pub fn mean_squared_norm(&self, x: ArrayView2<'_, T>) -> T {
        let norms = self.mahalanobis_norms(x);
        norms.iter().map(|&n| n * n).sum::<T>() / count::<T>(norms.len())
    }
}
