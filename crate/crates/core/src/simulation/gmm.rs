//! Gaussian mixture trainer fitted by expectation-maximization.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curriculum::{QualityMetric, Trainer};
use crate::error::{Error, Result};
use crate::features::{FeatureSet, PointId};
use crate::linalg::{cholesky, forward_substitute, mean_and_covariance};
use crate::scalar::{count, Scalar};
use crate::simulation::gaussian::{
    floor_eigenvalues, frechet_distance, moment_match, FrechetMetric, GaussianModelState, DEFAULT_RIDGE_FLOOR,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmmState<T> {
    pub weights: Vec<T>,
    pub means: Vec<Array1<T>>,
    pub covariances: Vec<Array2<T>>,
    /// Mean per-point log-likelihood at the returned parameters.
    pub log_likelihood: T,
    pub iterations: usize,
    pub fitted_count: usize,
}

impl<T: Scalar> GmmState<T> {
    pub fn components(&self) -> usize {
        self.weights.len()
    }

    /// Single Gaussian with the mixture's mean and covariance.
    pub fn moment_matched(&self) -> GaussianModelState<T> {
        moment_match(&self.weights, &self.means, &self.covariances)
    }
}

/// EM for a fixed number of full-covariance components, k-means++
/// initialization, warm starts continue from the previous parameters.
#[derive(Debug, Clone)]
pub struct GmmTrainer<'a, T> {
    features: &'a FeatureSet<T>,
    components: usize,
    max_iters: usize,
    tol: f64,
    ridge_floor: T,
}

impl<'a, T: Scalar> GmmTrainer<'a, T> {
    pub fn new(features: &'a FeatureSet<T>, components: usize) -> Result<Self> {
        if components == 0 {
            return Err(Error::param("mixture needs at least one component"));
        }
        Ok(Self {
            features,
            components,
            max_iters: 100,
            tol: 1e-8,
            ridge_floor: T::of(DEFAULT_RIDGE_FLOOR),
        })
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn kmeans_pp(&self, x: ArrayView2<'_, T>, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = x.nrows();
        let mut centers = vec![rng.random_range(0..n)];
        let mut best = vec![T::infinity(); n];
        while centers.len() < self.components {
            let c = x.row(*centers.last().unwrap());
            for (i, b) in best.iter_mut().enumerate() {
                let diff = &x.row(i) - &c;
                *b = b.min(diff.dot(&diff));
            }
            let total: f64 = best.iter().map(|v| v.to_f64_lossless()).sum();
            let next = if total > 0.0 {
                let mut target = rng.random_range(0.0..total);
                let mut pick = n - 1;
                for (i, v) in best.iter().enumerate() {
                    target -= v.to_f64_lossless();
                    if target < 0.0 {
                        pick = i;
                        break;
                    }
                }
                pick
            } else {
                rng.random_range(0..n)
            };
            centers.push(next);
        }
        centers
    }

    fn initial_state(&self, x: ArrayView2<'_, T>, seed: u64) -> Result<GmmState<T>> {
        let (n, d) = x.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = self.kmeans_pp(x, &mut rng);
        let mut assign: Vec<Vec<usize>> = vec![Vec::new(); self.components];
        for i in 0..n {
            let nearest = centers
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let diff = &x.row(i) - &x.row(c);
                    (k, diff.dot(&diff))
                })
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap()
                .0;
            assign[nearest].push(i);
        }
        let global = if n >= 2 {
            mean_and_covariance(x)?.1
        } else {
            Array2::eye(d)
        };
        let mut weights = Vec::with_capacity(self.components);
        let mut means = Vec::with_capacity(self.components);
        let mut covs = Vec::with_capacity(self.components);
        for (k, members) in assign.iter().enumerate() {
            let sub = x.select(Axis(0), members);
            let (mean, cov) = if members.len() >= 2 {
                mean_and_covariance(sub.view())?
            } else {
                (x.row(centers[k]).to_owned(), global.clone())
            };
            weights.push(count::<T>(members.len().max(1)) / count::<T>(n.max(self.components)));
            means.push(mean);
            covs.push(floor_eigenvalues(cov, self.ridge_floor)?);
        }
        let total: T = weights.iter().copied().sum();
        weights.iter_mut().for_each(|w| *w = *w / total);
        Ok(GmmState {
            weights,
            means,
            covariances: covs,
            log_likelihood: T::neg_infinity(),
            iterations: 0,
            fitted_count: n,
        })
    }

    /// Log responsibilities (unnormalized) and the mean log-likelihood.
    fn e_step(&self, x: ArrayView2<'_, T>, state: &GmmState<T>) -> Result<(Array2<T>, T)> {
        let (n, d) = x.dim();
        let k = state.components();
        let ln_2pi = T::of((2.0 * std::f64::consts::PI).ln());
        let half = T::of(0.5);
        let mut log_r = Array2::<T>::zeros((n, k));
        for c in 0..k {
            let l = cholesky(state.covariances[c].view())?;
            let log_det = l.diag().iter().map(|v| v.ln()).sum::<T>() * T::of(2.0);
            let mut l_inv = Array2::<T>::zeros((d, d));
            for j in 0..d {
                let mut e = vec![T::zero(); d];
                e[j] = T::one();
                forward_substitute(l.view(), &mut e);
                for i in 0..d {
                    l_inv[[i, j]] = e[i];
                }
            }
            let centered = &x - &state.means[c].view().insert_axis(Axis(0));
            let y = centered.dot(&l_inv.t());
            let base = state.weights[c].ln() - half * (count::<T>(d) * ln_2pi + log_det);
            for (i, row) in y.rows().into_iter().enumerate() {
                log_r[[i, c]] = base - half * row.dot(&row);
            }
        }
        let mut total = T::zero();
        for mut row in log_r.rows_mut() {
            let top = row.iter().copied().fold(T::neg_infinity(), T::max);
            let lse = top + row.iter().map(|&v| (v - top).exp()).sum::<T>().ln();
            row.mapv_inplace(|v| v - lse);
            total = total + lse;
        }
        Ok((log_r, total / count::<T>(n)))
    }

    fn m_step(&self, x: ArrayView2<'_, T>, log_r: &Array2<T>, prev: &GmmState<T>) -> Result<GmmState<T>> {
        let (n, d) = x.dim();
        let resp = log_r.mapv(T::exp);
        let mut next = prev.clone();
        let tiny = T::of(1e-10);
        for c in 0..prev.components() {
            let r = resp.column(c);
            let mass: T = r.sum();
            if mass <= tiny {
                continue;
            }
            let mean = r.dot(&x) / mass;
            let centered = &x - &mean.view().insert_axis(Axis(0));
            let weighted = &centered * &r.insert_axis(Axis(1));
            let cov = weighted.t().dot(&centered) / mass;
            next.weights[c] = mass / count::<T>(n);
            next.means[c] = mean;
            next.covariances[c] = floor_eigenvalues(symmetrize(cov, d), self.ridge_floor)?;
        }
        let total: T = next.weights.iter().copied().sum();
        next.weights.iter_mut().for_each(|w| *w = *w / total);
        Ok(next)
    }
}

fn symmetrize<T: Scalar>(mut a: Array2<T>, d: usize) -> Array2<T> {
    let half = T::of(0.5);
    for i in 0..d {
        for j in 0..i {
            let v = (a[[i, j]] + a[[j, i]]) * half;
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    a
}

impl<T: Scalar> Trainer for GmmTrainer<'_, T> {
    type State = GmmState<T>;

    fn train(&self, ids: &[PointId], warm_start: Option<&GmmState<T>>, seed: u64) -> Result<GmmState<T>> {
        if ids.is_empty() {
            return Err(Error::param("cannot fit a mixture to an empty training set"));
        }
        let rows = self.features.rows_of(ids)?;
        let x = self.features.gather(&rows);
        let mut state = match warm_start {
            Some(prev) => {
                if prev.components() != self.components || prev.means[0].len() != x.ncols() {
                    return Err(Error::param("warm-start mixture has the wrong shape"));
                }
                GmmState {
                    fitted_count: x.nrows(),
                    iterations: 0,
                    ..prev.clone()
                }
            }
            None => self.initial_state(x.view(), seed)?,
        };
        let tol = T::of(self.tol);
        let mut prev_ll = T::neg_infinity();
        for it in 0..self.max_iters {
            let (log_r, ll) = self.e_step(x.view(), &state)?;
            state.log_likelihood = ll;
            state.iterations = it;
            if (ll - prev_ll).abs() <= tol {
                return Ok(state);
            }
            prev_ll = ll;
            state = self.m_step(x.view(), &log_r, &state)?;
        }
        let (_, ll) = self.e_step(x.view(), &state)?;
        state.log_likelihood = ll;
        state.iterations = self.max_iters;
        Ok(state)
    }
}

impl<T: Scalar> QualityMetric<GmmState<T>> for FrechetMetric<T> {
    fn score(&self, state: &GmmState<T>) -> Result<f64> {
        frechet_distance(&state.moment_matched(), self.reference()).map(Scalar::to_f64_lossless)
    }
}
