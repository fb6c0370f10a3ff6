//! Gaussian-weighted kNN digraph.

use serde::Serialize;

use crate::centrality::knn::{pairwise_knn, KnnTable};
use crate::error::{Error, Result};
use crate::features::{FeatureSet, PointId};
use crate::scalar::{count, Scalar};

/// Sparse digraph with exactly `k` weighted out-edges per node and no
/// self-loops. Edge `(i, j)` carries `exp(-d_ij² / sigma²)` in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct WeightedDigraph<W> {
    k: usize,
    sigma: W,
    ids: Vec<PointId>,
    targets: Vec<usize>,
    weights: Vec<W>,
}

/// One edge of a graph dump.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Edge<W> {
    pub source: PointId,
    pub target: PointId,
    pub weight: W,
}

impl<W: Scalar> WeightedDigraph<W> {
    /// Assembles a graph from row-space adjacency. Each node must have `k`
    /// out-edges with positive weights and no self-loop.
    pub fn from_parts(
        k: usize,
        sigma: W,
        ids: Vec<PointId>,
        targets: Vec<usize>,
        weights: Vec<W>,
    ) -> Result<Self> {
        let m = ids.len();
        if k == 0 || targets.len() != m * k || weights.len() != m * k {
            return Err(Error::input("adjacency arrays do not match m * k"));
        }
        for (e, (&t, &w)) in targets.iter().zip(&weights).enumerate() {
            if t >= m || t == e / k {
                return Err(Error::input(format!("invalid edge target at edge {e}")));
            }
            if !(w > W::zero() && w <= W::one()) {
                return Err(Error::input(format!("edge weight {w} outside (0, 1]")));
            }
        }
        Ok(Self {
            k,
            sigma,
            ids,
            targets,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> W {
        self.sigma
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn out_targets(&self, row: usize) -> &[usize] {
        &self.targets[row * self.k..(row + 1) * self.k]
    }

    pub fn out_weights(&self, row: usize) -> &[W] {
        &self.weights[row * self.k..(row + 1) * self.k]
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge<W>> + '_ {
        (0..self.len()).flat_map(move |row| {
            self.out_targets(row)
                .iter()
                .zip(self.out_weights(row))
                .map(move |(&t, &w)| Edge {
                    source: self.ids[row],
                    target: self.ids[t],
                    weight: w,
                })
        })
    }

    /// Geometric mean of all edge weights.
    pub fn weight_geomean(&self) -> W {
        let log_sum: W = self.weights.iter().map(|w| w.ln()).sum();
        (log_sum / count::<W>(self.weights.len())).exp()
    }
}

/// Bandwidth `sigma` for which the geometric mean of `exp(-d²/sigma²)` over
/// the given edge distances equals `target_geomean`.
///
/// The geometric mean of the weights is `exp(-mean(d²)/sigma²)`, so
/// `sigma = sqrt(mean(d²) / -ln(target))`.
pub fn calibrate_sigma<W: Scalar>(distances: &[W], target_geomean: W) -> Result<W> {
    if !(target_geomean > W::zero() && target_geomean < W::one()) {
        return Err(Error::param(format!(
            "target geometric mean must lie in (0, 1), got {target_geomean}"
        )));
    }
    if distances.is_empty() {
        return Err(Error::DegenerateInput("no edge distances".into()));
    }
    if distances.iter().any(|d| !d.is_finite() || *d < W::zero()) {
        return Err(Error::input("edge distances must be finite and nonnegative"));
    }
    let mean_sq = distances.iter().map(|&d| d * d).sum::<W>() / count::<W>(distances.len());
    if mean_sq <= W::zero() {
        return Err(Error::DegenerateInput(
            "all neighbour distances are zero; sigma is undefined".into(),
        ));
    }
    Ok((mean_sq / -target_geomean.ln()).sqrt())
}

/// Gaussian edge weight. Weights that would underflow are clamped to the
/// smallest positive normal value so every row keeps a positive sum.
#[inline]
pub fn edge_weight<W: Scalar>(distance: W, sigma: W) -> W {
    let w = (-(distance * distance) / (sigma * sigma)).exp();
    w.max(W::min_positive_value())
}

/// Weights a kNN table, calibrating `sigma` in the weight precision `W`.
pub fn build_digraph_from_knn<T: Scalar, W: Scalar>(
    knn: &KnnTable<T>,
    target_geomean: W,
) -> Result<WeightedDigraph<W>> {
    let distances: Vec<W> = knn
        .all_distances()
        .iter()
        .map(|&d| W::of(d.to_f64_lossless()))
        .collect();
    let sigma = calibrate_sigma(&distances, target_geomean)?;
    let weights = distances.iter().map(|&d| edge_weight(d, sigma)).collect();
    let m = knn.len();
    let targets = (0..m).flat_map(|r| knn.neighbor_rows(r).iter().copied()).collect();
    WeightedDigraph::from_parts(knn.k(), sigma, knn.ids().to_vec(), targets, weights)
}

/// kNN search, bandwidth calibration and weighting in one step.
pub fn build_digraph<T: Scalar>(
    features: &FeatureSet<T>,
    k: usize,
    target_geomean: T,
) -> Result<WeightedDigraph<T>> {
    let knn = pairwise_knn(features, k)?;
    build_digraph_from_knn(&knn, target_geomean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn sigma_for_unit_distances() {
        let s = calibrate_sigma(&[1.0_f64; 10], 0.8).unwrap();
        assert_abs_diff_eq!(s, (1.0 / -(0.8_f64).ln()).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s, 2.11693, epsilon = 1e-5);
    }

    #[test]
    fn sigma_for_two_distances_hits_target_geomean() {
        let s = calibrate_sigma(&[1.0_f64, 2.0], 0.8).unwrap();
        assert_abs_diff_eq!(s, 3.34717, epsilon = 1e-5);
        // Independent check: geometric mean of the two resulting weights.
        let w1 = (-1.0 / (s * s)).exp();
        let w2 = (-4.0 / (s * s)).exp();
        assert_abs_diff_eq!((w1 * w2).sqrt(), 0.8, epsilon = 1e-14);
    }

    #[test]
    fn sigma_half_target_scales_with_distance() {
        let c = 3.7_f64;
        let s = calibrate_sigma(&[c, c, c], 0.5).unwrap();
        assert_abs_diff_eq!(s, c / 2.0_f64.ln().sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn sigma_errors() {
        assert!(matches!(calibrate_sigma(&[0.0_f64, 0.0], 0.8), Err(Error::DegenerateInput(_))));
        assert!(matches!(calibrate_sigma(&[1.0_f64], 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(calibrate_sigma(&[1.0_f64], 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn two_points_get_target_weight() {
        let fs = FeatureSet::with_sequential_ids(array![[0.0_f64], [1.0]]).unwrap();
        let g = build_digraph(&fs, 1, 0.8).unwrap();
        assert_abs_diff_eq!(g.out_weights(0)[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(g.out_weights(1)[0], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn duplicate_point_has_unit_weight() {
        let fs = FeatureSet::with_sequential_ids(array![[0.0_f64], [0.0], [2.0]]).unwrap();
        let g = build_digraph(&fs, 1, 0.8).unwrap();
        assert_eq!(g.out_weights(0)[0], 1.0);
        assert!(g.out_weights(2)[0] < 1.0);
    }

    #[test]
    fn weight_decreases_with_distance() {
        let sigma = 1.3_f64;
        let mut prev = edge_weight(0.0, sigma);
        assert_eq!(prev, 1.0);
        for i in 1..200 {
            let w = edge_weight(i as f64 * 0.01, sigma);
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn rejects_self_loops() {
        let err = WeightedDigraph::from_parts(1, 1.0_f64, vec![0, 1], vec![0, 0], vec![0.5, 0.5]);
        assert!(err.is_err());
    }
}
