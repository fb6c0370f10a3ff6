//! Seeded synthetic feature sets: Gaussian clusters plus uniform outliers.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::linalg::cholesky;
use crate::scalar::Scalar;

/// Scalar bounds apply to every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

impl Bound {
    fn resolve(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            Bound::Uniform(v) => Ok(vec![*v; d]),
            Bound::PerAxis(v) if v.len() == d => Ok(v.clone()),
            Bound::PerAxis(v) => Err(Error::param(format!(
                "box bound has {} coordinates, expected {d}",
                v.len()
            ))),
        }
    }
}

/// One Gaussian component. Give either `covariance` or the isotropic
/// standard deviation `scale` (covariance `scale² I`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub count: usize,
}

/// Outliers drawn uniformly from the box `[low, high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub count: usize,
    pub low: Bound,
    pub high: Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub clusters: Vec<ClusterSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Size of the held-out clean sample used as the scoring reference.
    #[serde(default = "default_reference_count")]
    pub reference_count: usize,
}

fn default_reference_count() -> usize {
    4000
}

/// Ground truth for a generated point. Never consulted by curriculum logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Cluster(usize),
    Noise,
}

#[derive(Debug, Clone)]
pub struct SyntheticData<T> {
    pub features: FeatureSet<T>,
    /// Row-aligned with `features`.
    pub labels: Vec<Label>,
}

struct Component {
    mean: Array1<f64>,
    chol: Array2<f64>,
    count: usize,
}

impl SyntheticSpec {
    pub fn dim(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.mean.len())
    }

    pub fn noise_count(&self) -> usize {
        self.noise.as_ref().map_or(0, |n| n.count)
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.iter().map(|c| c.count).sum()
    }

    pub fn total(&self) -> usize {
        self.cluster_count() + self.noise_count()
    }

    /// Copy with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    fn components(&self) -> Result<Vec<Component>> {
        let d = self.dim();
        if self.clusters.is_empty() || d == 0 {
            return Err(Error::param("spec needs at least one cluster with a nonempty mean"));
        }
        self.clusters
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.mean.len() != d {
                    return Err(Error::param(format!("cluster {i} mean has the wrong dimension")));
                }
                if c.count == 0 {
                    return Err(Error::param(format!("cluster {i} has zero count")));
                }
                if c.mean.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param(format!("cluster {i} mean is not finite")));
                }
                let cov = match (&c.covariance, c.scale) {
                    (Some(rows), None) => {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(Error::param(format!("cluster {i} covariance must be {d}x{d}")));
                        }
                        let m = Array2::from_shape_fn((d, d), |(a, b)| rows[a][b]);
                        if (0..d).any(|a| (0..a).any(|b| (m[[a, b]] - m[[b, a]]).abs() > 1e-12 * (1.0 + m[[a, b]].abs()))) {
                            return Err(Error::param(format!("cluster {i} covariance is not symmetric")));
                        }
                        m
                    }
                    (None, Some(s)) if s > 0.0 && s.is_finite() => Array2::eye(d) * (s * s),
                    (None, Some(s)) => {
                        return Err(Error::param(format!("cluster {i} scale must be positive, got {s}")))
                    }
                    _ => {
                        return Err(Error::param(format!(
                            "cluster {i} needs exactly one of `covariance` or `scale`"
                        )))
                    }
                };
                let chol = cholesky(cov.view()).map_err(|_| {
                    Error::param(format!("cluster {i} covariance is not positive definite"))
                })?;
                Ok(Component {
                    mean: Array1::from(c.mean.clone()),
                    chol,
                    count: c.count,
                })
            })
            .collect()
    }

    fn noise_box(&self) -> Result<Option<(usize, Vec<f64>, Vec<f64>)>> {
        let Some(noise) = &self.noise else {
            return Ok(None);
        };
        let d = self.dim();
        let low = noise.low.resolve(d)?;
        let high = noise.high.resolve(d)?;
        if low.iter().zip(&high).any(|(l, h)| !(l < h)) {
            return Err(Error::param("noise box needs low < high on every axis"));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.mean.iter().zip(low.iter().zip(&high)).any(|(m, (l, h))| m < l || m > h) {
                return Err(Error::param(format!("noise box does not enclose cluster {i}'s mean")));
            }
        }
        Ok(Some((noise.count, low, high)))
    }

    /// Checks every invariant without generating anything.
    pub fn validate(&self) -> Result<()> {
        self.components()?;
        self.noise_box()?;
        if self.total() < 2 {
            return Err(Error::param("spec must produce at least two points"));
        }
        Ok(())
    }
}

fn draw(component: &Component, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let z: Array1<f64> = (0..component.mean.len()).map(|_| rng.sample(StandardNormal)).collect();
    &component.mean + &component.chol.dot(&z)
}

const DATA_STREAM: u64 = 0x5EED_DA7A;
const REFERENCE_STREAM: u64 = 0x5EED_4EF0;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws the clusters and the noise, shuffles the rows, and assigns ids
/// `0..m` in shuffled order. Bitwise reproducible under `spec.seed`.
pub fn generate_synthetic<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticData<T>> {
    spec.validate()?;
    let components = spec.components()?;
    let noise = spec.noise_box()?;
    let d = spec.dim();
    let mut rng = rng_for(spec.seed, DATA_STREAM);

    let mut rows: Vec<(Array1<f64>, Label)> = Vec::with_capacity(spec.total());
    for (i, comp) in components.iter().enumerate() {
        for _ in 0..comp.count {
            rows.push((draw(comp, &mut rng), Label::Cluster(i)));
        }
    }
    if let Some((count, low, high)) = noise {
        for _ in 0..count {
            let p: Array1<f64> = low.iter().zip(&high).map(|(&l, &h)| rng.random_range(l..h)).collect();
            rows.push((p, Label::Noise));
        }
    }
    rows.shuffle(&mut rng);

    let mut points = Array2::<T>::zeros((rows.len(), d));
    for (r, (p, _)) in rows.iter().enumerate() {
        for (j, &v) in p.iter().enumerate() {
            points[[r, j]] = T::of(v);
        }
    }
    let labels = rows.into_iter().map(|(_, l)| l).collect();
    Ok(SyntheticData {
        features: FeatureSet::with_sequential_ids(points)?,
        labels,
    })
}

/// Held-out clean sample of `spec.reference_count` points from the cluster
/// components only, split across components in proportion to their counts.
/// Uses an RNG stream disjoint from [`generate_synthetic`]'s.
pub fn generate_reference<T: Scalar>(spec: &SyntheticSpec) -> Result<FeatureSet<T>> {
    let components = spec.components()?;
    let n = spec.reference_count;
    if n < 2 {
        return Err(Error::param("reference sample needs at least two points"));
    }
    let total = spec.cluster_count();
    let mut rng = rng_for(spec.seed, REFERENCE_STREAM);
    let d = spec.dim();
    let mut points = Array2::<T>::zeros((n, d));
    let mut row = 0;
    let mut assigned = 0;
    for (i, comp) in components.iter().enumerate() {
        let share = if i + 1 == components.len() {
            n - assigned
        } else {
            (n * comp.count) / total
        };
        assigned += share;
        for _ in 0..share {
            let p = draw(comp, &mut rng);
            for (j, &v) in p.iter().enumerate() {
                points[[row, j]] = T::of(v);
            }
            row += 1;
        }
    }
    FeatureSet::with_sequential_ids(points)
}
