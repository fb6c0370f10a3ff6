//! Closed-form Gaussian trainer and the Fréchet distance between Gaussians.

use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use crate::curriculum::{QualityMetric, Trainer};
use crate::error::{Error, Result};
use crate::features::{FeatureSet, PointId};
use crate::linalg::{mean_and_covariance, SymmetricEigen};
use crate::scalar::Scalar;

pub const DEFAULT_RIDGE_FLOOR: f64 = 1e-6;

/// A fitted Gaussian `N(mean, covariance)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianModelState<T> {
    pub mean: Array1<T>,
    pub covariance: Array2<T>,
    pub fitted_count: usize,
}

impl<T: Scalar> GaussianModelState<T> {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// What the trainer does with a warm-start state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarmStartPolicy {
    /// Exact maximum likelihood; the previous state is accepted and ignored.
    Ignore,
    /// `beta * previous + (1 - beta) * fresh fit`, for mean and covariance.
    Blend { beta: f64 },
}

/// Raises every eigenvalue of a symmetric matrix to at least `floor`.
/// Matrices already above the floor are returned untouched.
pub fn floor_eigenvalues<T: Scalar>(cov: Array2<T>, floor: T) -> Result<Array2<T>> {
    let eig = SymmetricEigen::new(cov.view())?;
    if eig.values.iter().all(|&v| v >= floor) {
        return Ok(cov);
    }
    Ok(eig.reconstruct_with(|v| v.max(floor)))
}

/// Sample mean and unbiased covariance (eigenvalues floored) of `x`.
pub fn fit_gaussian<T: Scalar>(x: ndarray::ArrayView2<'_, T>, floor: T) -> Result<GaussianModelState<T>> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::param("cannot fit a Gaussian to an empty training set"));
    }
    let (mean, cov) = if n == 1 {
        (x.row(0).to_owned(), Array2::zeros((x.ncols(), x.ncols())))
    } else {
        mean_and_covariance(x)?
    };
    Ok(GaussianModelState {
        mean,
        covariance: floor_eigenvalues(cov, floor)?,
        fitted_count: n,
    })
}

/// Fits a single Gaussian to the training subset.
#[derive(Debug, Clone)]
pub struct GaussianTrainer<'a, T> {
    features: &'a FeatureSet<T>,
    ridge_floor: T,
    policy: WarmStartPolicy,
}

impl<'a, T: Scalar> GaussianTrainer<'a, T> {
    pub fn new(features: &'a FeatureSet<T>) -> Self {
        Self {
            features,
            ridge_floor: T::of(DEFAULT_RIDGE_FLOOR),
            policy: WarmStartPolicy::Ignore,
        }
    }

    pub fn with_ridge_floor(mut self, floor: T) -> Self {
        self.ridge_floor = floor;
        self
    }

    pub fn with_policy(mut self, policy: WarmStartPolicy) -> Result<Self> {
        if let WarmStartPolicy::Blend { beta } = policy {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::param(format!("blend factor must lie in [0, 1), got {beta}")));
            }
        }
        self.policy = policy;
        Ok(self)
    }
}

impl<T: Scalar> Trainer for GaussianTrainer<'_, T> {
    type State = GaussianModelState<T>;

    fn train(
        &self,
        ids: &[PointId],
        warm_start: Option<&GaussianModelState<T>>,
        _seed: u64,
    ) -> Result<GaussianModelState<T>> {
        let rows = self.features.rows_of(ids)?;
        let x = self.features.gather(&rows);
        let fresh = fit_gaussian(x.view(), self.ridge_floor)?;
        match (self.policy, warm_start) {
            (WarmStartPolicy::Blend { beta }, Some(prev)) => {
                if prev.dim() != fresh.dim() {
                    return Err(Error::param("warm-start state has the wrong dimension"));
                }
                let b = T::of(beta);
                let a = T::one() - b;
                Ok(GaussianModelState {
                    mean: &prev.mean * b + &fresh.mean * a,
                    covariance: &prev.covariance * b + &fresh.covariance * a,
                    fitted_count: fresh.fitted_count,
                })
            }
            _ => Ok(fresh),
        }
    }
}

fn check_spd<T: Scalar>(cov: &Array2<T>, which: &str) -> Result<SymmetricEigen<T>> {
    let eig = SymmetricEigen::new(cov.view())?;
    if eig.values.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::param(format!("{which} covariance is not positive definite")));
    }
    Ok(eig)
}

/// `|μ₁ - μ₂|² + tr(Σ₁ + Σ₂ - 2 (Σ₁Σ₂)^½)`.
///
/// The trace of `(Σ₁Σ₂)^½` is taken from the symmetric similar matrix
/// `Σ₁^½ Σ₂ Σ₁^½`, whose eigenvalues are those of `Σ₁Σ₂`.
pub fn frechet_distance<T: Scalar>(a: &GaussianModelState<T>, b: &GaussianModelState<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::param("Gaussians have different dimensions"));
    }
    let eig_a = check_spd(&a.covariance, "first")?;
    check_spd(&b.covariance, "second")?;
    let sqrt_a = eig_a.reconstruct_with(|v| v.sqrt());
    let inner = sqrt_a.dot(&b.covariance).dot(&sqrt_a);
    let trace_sqrt: T = SymmetricEigen::new(inner.view())?
        .values
        .iter()
        .map(|&v| v.max(T::zero()).sqrt())
        .sum();
    let diff = &a.mean - &b.mean;
    let two = T::of(2.0);
    let value = diff.dot(&diff) + a.covariance.diag().sum() + b.covariance.diag().sum() - two * trace_sqrt;
    Ok(value.max(T::zero()))
}

/// Fréchet distance to a fixed Gaussian fitted on a reference sample.
#[derive(Debug, Clone)]
pub struct FrechetMetric<T> {
    reference: GaussianModelState<T>,
}

impl<T: Scalar> FrechetMetric<T> {
    pub fn from_reference(reference: &FeatureSet<T>) -> Result<Self> {
        Ok(Self {
            reference: fit_gaussian(reference.points().view(), T::of(DEFAULT_RIDGE_FLOOR))?,
        })
    }

    pub fn from_state(reference: GaussianModelState<T>) -> Self {
        Self { reference }
    }

    pub fn reference(&self) -> &GaussianModelState<T> {
        &self.reference
    }
}

impl<T: Scalar> QualityMetric<GaussianModelState<T>> for FrechetMetric<T> {
    fn score(&self, state: &GaussianModelState<T>) -> Result<f64> {
        frechet_distance(state, &self.reference).map(Scalar::to_f64_lossless)
    }
}

/// Fréchet distance between `model` and the Gaussian fit of `reference`.
pub fn score_against_reference<T: Scalar>(model: &GaussianModelState<T>, reference: &FeatureSet<T>) -> Result<T> {
    let reference = fit_gaussian(reference.points().view(), T::of(DEFAULT_RIDGE_FLOOR))?;
    frechet_distance(model, &reference)
}

/// Mean and covariance of a weighted set of Gaussians (moment matching).
pub fn moment_match<T: Scalar>(weights: &[T], means: &[Array1<T>], covs: &[Array2<T>]) -> GaussianModelState<T> {
    let d = means[0].len();
    let mut mean = Array1::<T>::zeros(d);
    for (&w, mu) in weights.iter().zip(means) {
        mean = mean + mu * w;
    }
    let mut cov = Array2::<T>::zeros((d, d));
    for ((&w, mu), c) in weights.iter().zip(means).zip(covs) {
        let delta = (mu - &mean).insert_axis(Axis(1));
        cov = cov + (c + &delta.dot(&delta.t())) * w;
    }
    GaussianModelState {
        mean,
        covariance: cov,
        fitted_count: 0,
    }
}
